#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "synthattr/nn/checkpoint.hpp"
#include "synthattr/nn/layers.hpp"
#include "synthattr/nn/optimizer.hpp"

namespace synthattr::models {

// Inception-style TSSDNet: stem 1x7 conv (16 ch) + BN + ReLU + pool 4, then
// num_blocks blocks of four parallel dilated 1x3 branches concatenated on
// the channel axis (pool 4 between blocks, global max pool after the last),
// two Linear(C_L)+ReLU layers and a Linear(num_classes) head.
struct IncTssdConfig {
  int branch_channels = 16;    // C1 per branch
  int num_blocks = 4;          // M
  int penultimate_width = 32;  // C_L; the embedding width
  int num_classes = 6;
  std::vector<int> dilations = {1, 2, 3, 4};

  void validate() const;
  int concat_channels() const {
    return branch_channels * static_cast<int>(dilations.size());
  }
  // One stem pool, num_blocks-1 inter-block pools, and the global pool must
  // all see a non-empty axis.
  std::int64_t min_input_length() const {
    std::int64_t n = 1;
    for (int i = 0; i < num_blocks + 1; ++i) n *= 4;
    return n;
  }
  std::string to_config_string() const;
  static IncTssdConfig from_config_string(const std::string& text);
};

// ResNet-style TSSDNet: same stem, then one stage per stage_channels entry
// of [conv 1x3 + BN + ReLU + conv 1x3 + BN] residual blocks (1x1 conv
// shortcut when the channel count changes), pool 4 after each stage, global
// max pool, Linear(32)+ReLU and the classification head.
struct ResTssdConfig {
  std::vector<int> stage_channels = {16, 32, 64, 128};
  int blocks_per_stage = 1;
  int penultimate_width = 32;
  int num_classes = 6;

  void validate() const;
  std::int64_t min_input_length() const {
    std::int64_t n = 4;
    for (std::size_t i = 0; i < stage_channels.size(); ++i) n *= 4;
    return n;
  }
  std::string to_config_string() const;
  static ResTssdConfig from_config_string(const std::string& text);
};

inline constexpr int kStemChannels = 16;
inline constexpr const char* kIncTssdArchId = "inc-tssd";
inline constexpr const char* kResTssdArchId = "res-tssd";

namespace detail {

template <class T>
nn::Tensor<T> concat_channels(const std::vector<nn::Tensor<T>>& xs) {
  const std::int64_t B = xs[0].dim(0), L = xs[0].dim(2);
  std::int64_t C = 0;
  for (const auto& x : xs) C += x.dim(1);
  nn::Tensor<T> out({B, C, L});
  std::int64_t offset = 0;
  for (const auto& x : xs) {
    const std::int64_t c = x.dim(1);
    for (std::int64_t b = 0; b < B; ++b)
      std::copy(x.data() + b * c * L, x.data() + (b + 1) * c * L,
                out.data() + (b * C + offset) * L);
    offset += c;
  }
  return out;
}

template <class T>
std::vector<nn::Tensor<T>> split_channels(const nn::Tensor<T>& g,
                                          const std::vector<std::int64_t>& widths) {
  const std::int64_t B = g.dim(0), C = g.dim(1), L = g.dim(2);
  std::vector<nn::Tensor<T>> out;
  std::int64_t offset = 0;
  for (const auto c : widths) {
    nn::Tensor<T> part({B, c, L});
    for (std::int64_t b = 0; b < B; ++b)
      std::copy(g.data() + (b * C + offset) * L, g.data() + (b * C + offset + c) * L,
                part.data() + b * c * L);
    out.push_back(std::move(part));
    offset += c;
  }
  return out;
}

template <class T>
void add_inplace(nn::Tensor<T>& a, const nn::Tensor<T>& b) {
  if (a.shape != b.shape) throw ShapeMismatch("add: shape mismatch");
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
}

}  // namespace detail

template <class T>
class IncTssdNet {
 public:
  explicit IncTssdNet(const IncTssdConfig& cfg, std::uint64_t seed = 0)
      : cfg_(validated(cfg)),
        rng_(splitmix64(seed ^ 0x696e63ULL)),
        stem_conv_("stem.conv", 1, kStemChannels, 7, 1, rng_),
        stem_bn_("stem.bn", kStemChannels),
        stem_pool_(4),
        fc1_("fc1", cfg.concat_channels(), cfg.penultimate_width, rng_),
        fc2_("fc2", cfg.penultimate_width, cfg.penultimate_width, rng_),
        head_("head", cfg.penultimate_width, cfg.num_classes, rng_) {
    int in_ch = kStemChannels;
    for (int m = 0; m < cfg_.num_blocks; ++m) {
      Block block;
      for (std::size_t d = 0; d < cfg_.dilations.size(); ++d) {
        const std::string name = "block" + std::to_string(m) + ".branch" +
                                 std::to_string(d);
        block.branches.emplace_back(name, in_ch, cfg_.branch_channels,
                                    cfg_.dilations[d], rng_);
      }
      if (m + 1 < cfg_.num_blocks) block.pool.emplace(4);
      blocks_.push_back(std::move(block));
      in_ch = cfg_.concat_channels();
    }
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) {
    nn::check_shape(x, 3, "inc-tssd input");
    if (x.dim(1) != 1) throw ShapeMismatch("inc-tssd expects 1 input channel");
    if (x.dim(2) < cfg_.min_input_length())
      throw ShapeMismatch("inc-tssd input shorter than " +
                              std::to_string(cfg_.min_input_length()));
    auto h = stem_pool_.forward(
        stem_relu_.forward(stem_bn_.forward(stem_conv_.forward(x, mode), mode), mode),
        mode);
    for (auto& block : blocks_) {
      std::vector<nn::Tensor<T>> branch_outs;
      branch_outs.reserve(block.branches.size());
      for (auto& br : block.branches) branch_outs.push_back(br.forward(h, mode));
      h = detail::concat_channels(branch_outs);
      if (block.pool)
        h = block.pool->forward(h, mode);
      else
        h = gmp_.forward(h, mode);
    }
    auto e1 = fc1_relu_.forward(fc1_.forward(h, mode), mode);
    embedding_ = fc2_relu_.forward(fc2_.forward(e1, mode), mode);
    return head_.forward(embedding_, mode);
  }

  void backward(const nn::Tensor<T>& grad_logits) {
    auto g = head_.backward(grad_logits);
    g = fc1_.backward(fc1_relu_.backward(fc2_.backward(fc2_relu_.backward(g))));
    const std::vector<std::int64_t> widths(cfg_.dilations.size(),
                                           cfg_.branch_channels);
    nn::Tensor<T> g3;
    for (std::size_t m = blocks_.size(); m-- > 0;) {
      auto& block = blocks_[m];
      if (block.pool)
        g3 = block.pool->backward(g3);
      else
        g3 = gmp_.backward(g);
      auto parts = detail::split_channels(g3, widths);
      nn::Tensor<T> gin;
      for (std::size_t d = 0; d < block.branches.size(); ++d) {
        auto gb = block.branches[d].backward(parts[d]);
        if (d == 0)
          gin = std::move(gb);
        else
          detail::add_inplace(gin, gb);
      }
      g3 = std::move(gin);
    }
    g3 = stem_pool_.backward(g3);
    stem_conv_.backward(stem_bn_.backward(stem_relu_.backward(g3)));
  }

  // Penultimate ReLU activation: the [B, C_L] vectors the analysis uses.
  nn::Tensor<T> embed(const nn::Tensor<T>& x) {
    forward(x, nn::Mode::eval);
    return embedding_;
  }

  const nn::Tensor<T>& last_embedding() const { return embedding_; }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    stem_conv_.collect(out);
    stem_bn_.collect(out);
    for (auto& block : blocks_)
      for (auto& br : block.branches) br.collect(out);
    fc1_.collect(out);
    fc2_.collect(out);
    head_.collect(out);
    return out;
  }

  nn::BufferList<T> buffers() {
    nn::BufferList<T> out;
    stem_bn_.collect_buffers(out);
    for (auto& block : blocks_)
      for (auto& br : block.branches) br.bn.collect_buffers(out);
    return out;
  }

  const IncTssdConfig& config() const { return cfg_; }

  nn::Checkpoint to_checkpoint() {
    return nn::make_checkpoint(kIncTssdArchId, cfg_.to_config_string(), params(),
                               buffers());
  }

  void restore(const nn::Checkpoint& ckpt) {
    nn::load_into_params(ckpt, params(), buffers());
  }

 private:
  static const IncTssdConfig& validated(const IncTssdConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  struct Branch {
    nn::Conv1d<T> conv;
    nn::BatchNorm1d<T> bn;
    nn::ReLU<T> relu;

    Branch(const std::string& name, int in_ch, int out_ch, int dilation, Rng& rng)
        : conv(name + ".conv", in_ch, out_ch, 3, dilation, rng),
          bn(name + ".bn", out_ch) {}

    nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) {
      return relu.forward(bn.forward(conv.forward(x, mode), mode), mode);
    }
    nn::Tensor<T> backward(const nn::Tensor<T>& g) {
      return conv.backward(bn.backward(relu.backward(g)));
    }
    void collect(std::vector<nn::Param<T>*>& out) {
      conv.collect(out);
      bn.collect(out);
    }
  };

  struct Block {
    std::vector<Branch> branches;
    std::optional<nn::MaxPool1d<T>> pool;  // absent on the last block
  };

  IncTssdConfig cfg_;
  Rng rng_;
  nn::Conv1d<T> stem_conv_;
  nn::BatchNorm1d<T> stem_bn_;
  nn::ReLU<T> stem_relu_;
  nn::MaxPool1d<T> stem_pool_;
  std::vector<Block> blocks_;
  nn::GlobalMaxPool<T> gmp_;
  nn::Linear<T> fc1_, fc2_, head_;
  nn::ReLU<T> fc1_relu_, fc2_relu_;
  nn::Tensor<T> embedding_;
};

// [conv 1x3 + BN + ReLU + conv 1x3 + BN] with an identity shortcut (1x1
// conv when the channel count changes) and ReLU after the sum.
template <class T>
struct ResidualBlock {
  nn::Conv1d<T> conv1;
  nn::BatchNorm1d<T> bn1;
  nn::ReLU<T> relu1;
  nn::Conv1d<T> conv2;
  nn::BatchNorm1d<T> bn2;
  std::optional<nn::Conv1d<T>> shortcut;
  nn::ReLU<T> relu_out;

  ResidualBlock(const std::string& name, int in_ch, int out_ch, Rng& rng)
      : conv1(name + ".conv1", in_ch, out_ch, 3, 1, rng),
        bn1(name + ".bn1", out_ch),
        conv2(name + ".conv2", out_ch, out_ch, 3, 1, rng),
        bn2(name + ".bn2", out_ch) {
    if (in_ch != out_ch)
      shortcut.emplace(name + ".shortcut", in_ch, out_ch, 1, 1, rng);
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) {
    auto r = bn2.forward(
        conv2.forward(relu1.forward(bn1.forward(conv1.forward(x, mode), mode), mode),
                      mode),
        mode);
    if (shortcut)
      detail::add_inplace(r, shortcut->forward(x, mode));
    else
      detail::add_inplace(r, x);
    return relu_out.forward(r, mode);
  }

  nn::Tensor<T> backward(const nn::Tensor<T>& g) {
    auto gsum = relu_out.backward(g);
    auto gres = conv1.backward(
        bn1.backward(relu1.backward(conv2.backward(bn2.backward(gsum)))));
    if (shortcut)
      detail::add_inplace(gres, shortcut->backward(gsum));
    else
      detail::add_inplace(gres, gsum);
    return gres;
  }

  void collect(std::vector<nn::Param<T>*>& out) {
    conv1.collect(out);
    bn1.collect(out);
    conv2.collect(out);
    bn2.collect(out);
    if (shortcut) shortcut->collect(out);
  }
};

template <class T>
class ResTssdNet {
 public:
  explicit ResTssdNet(const ResTssdConfig& cfg, std::uint64_t seed = 0)
      : cfg_(validated(cfg)),
        rng_(splitmix64(seed ^ 0x726573ULL)),
        stem_conv_("stem.conv", 1, kStemChannels, 7, 1, rng_),
        stem_bn_("stem.bn", kStemChannels),
        stem_pool_(4),
        fc_("fc", cfg.stage_channels.back(), cfg.penultimate_width, rng_),
        head_("head", cfg.penultimate_width, cfg.num_classes, rng_) {
    int in_ch = kStemChannels;
    for (std::size_t s = 0; s < cfg_.stage_channels.size(); ++s) {
      Stage stage;
      const int out_ch = cfg_.stage_channels[s];
      for (int b = 0; b < cfg_.blocks_per_stage; ++b) {
        const std::string name =
            "stage" + std::to_string(s) + ".block" + std::to_string(b);
        stage.blocks.emplace_back(name, in_ch, out_ch, rng_);
        in_ch = out_ch;
      }
      stages_.push_back(std::move(stage));
    }
  }

  nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) {
    nn::check_shape(x, 3, "res-tssd input");
    if (x.dim(1) != 1) throw ShapeMismatch("res-tssd expects 1 input channel");
    if (x.dim(2) < cfg_.min_input_length())
      throw ShapeMismatch("res-tssd input shorter than " +
                              std::to_string(cfg_.min_input_length()));
    auto h = stem_pool_.forward(
        stem_relu_.forward(stem_bn_.forward(stem_conv_.forward(x, mode), mode), mode),
        mode);
    for (auto& stage : stages_) {
      for (auto& block : stage.blocks) h = block.forward(h, mode);
      h = stage.pool.forward(h, mode);
    }
    auto pooled = gmp_.forward(h, mode);
    embedding_ = fc_relu_.forward(fc_.forward(pooled, mode), mode);
    return head_.forward(embedding_, mode);
  }

  void backward(const nn::Tensor<T>& grad_logits) {
    auto g2 = fc_.backward(fc_relu_.backward(head_.backward(grad_logits)));
    auto g = gmp_.backward(g2);
    for (std::size_t s = stages_.size(); s-- > 0;) {
      auto& stage = stages_[s];
      g = stage.pool.backward(g);
      for (std::size_t b = stage.blocks.size(); b-- > 0;)
        g = stage.blocks[b].backward(g);
    }
    g = stem_pool_.backward(g);
    stem_conv_.backward(stem_bn_.backward(stem_relu_.backward(g)));
  }

  nn::Tensor<T> embed(const nn::Tensor<T>& x) {
    forward(x, nn::Mode::eval);
    return embedding_;
  }

  const nn::Tensor<T>& last_embedding() const { return embedding_; }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    stem_conv_.collect(out);
    stem_bn_.collect(out);
    for (auto& stage : stages_)
      for (auto& block : stage.blocks) block.collect(out);
    fc_.collect(out);
    head_.collect(out);
    return out;
  }

  nn::BufferList<T> buffers() {
    nn::BufferList<T> out;
    stem_bn_.collect_buffers(out);
    for (auto& stage : stages_)
      for (auto& block : stage.blocks) {
        block.bn1.collect_buffers(out);
        block.bn2.collect_buffers(out);
      }
    return out;
  }

  const ResTssdConfig& config() const { return cfg_; }

  nn::Checkpoint to_checkpoint() {
    return nn::make_checkpoint(kResTssdArchId, cfg_.to_config_string(), params(),
                               buffers());
  }

  void restore(const nn::Checkpoint& ckpt) {
    nn::load_into_params(ckpt, params(), buffers());
  }

 private:
  static const ResTssdConfig& validated(const ResTssdConfig& cfg) {
    cfg.validate();
    return cfg;
  }

  struct Stage {
    std::vector<ResidualBlock<T>> blocks;
    nn::MaxPool1d<T> pool{4};
  };

  ResTssdConfig cfg_;
  Rng rng_;
  nn::Conv1d<T> stem_conv_;
  nn::BatchNorm1d<T> stem_bn_;
  nn::ReLU<T> stem_relu_;
  nn::MaxPool1d<T> stem_pool_;
  std::vector<Stage> stages_;
  nn::GlobalMaxPool<T> gmp_;
  nn::Linear<T> fc_, head_;
  nn::ReLU<T> fc_relu_;
  nn::Tensor<T> embedding_;
};

}  // namespace synthattr::models
