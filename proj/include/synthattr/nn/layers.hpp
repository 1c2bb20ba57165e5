#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"
#include "synthattr/nn/tensor.hpp"

namespace synthattr::nn {

enum class Mode { train, eval };

// 1D convolution (cross-correlation) with "same" zero padding
// d*(k-1)/2, stride 1, odd kernel. Input [B, Cin, L] -> [B, Cout, L].
template <class T>
class Conv1d {
 public:
  Conv1d(std::string name, int in_ch, int out_ch, int kernel, int dilation, Rng& rng)
      : in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        dilation_(dilation),
        weight_(name + ".weight", {out_ch, in_ch, kernel}),
        bias_(name + ".bias", {out_ch}) {
    if (kernel % 2 == 0) throw ConfigInvalid("conv kernel must be odd");
    if (dilation < 1) throw ConfigInvalid("conv dilation must be >= 1");
    // Kaiming-uniform, fan-in mode.
    const double bound = std::sqrt(6.0 / (in_ch * kernel));
    for (auto& w : weight_.value.values)
      w = static_cast<T>(rng.uniform(-bound, bound));
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_shape(x, 3, "conv1d input");
    if (x.dim(1) != in_ch_)
      throw ShapeMismatch("conv1d: expected " + std::to_string(in_ch_) +
                          " input channels, got " + std::to_string(x.dim(1)));
    const std::int64_t B = x.dim(0), L = x.dim(2);
    Tensor<T> y({B, out_ch_, L});
    const T* xp = x.data();
    T* yp = y.data();
    const T* w = weight_.value.data();
    const T* b = bias_.value.data();

    parallel_for(0, B * out_ch_, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t bo = lo; bo < hi; ++bo) {
        const std::int64_t bb = bo / out_ch_, o = bo % out_ch_;
        T* out = yp + (bb * out_ch_ + o) * L;
        std::fill(out, out + L, b[o]);
        for (std::int64_t c = 0; c < in_ch_; ++c)
          accumulate_row(out, xp + (bb * in_ch_ + c) * L,
                         w + (o * in_ch_ + c) * kernel_, L, false);
      }
    });
    if (mode == Mode::train) cached_input_ = x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    const Tensor<T>& x = cached_input_;
    check_shape(gy, 3, "conv1d grad");
    const std::int64_t B = x.dim(0), L = x.dim(2);
    if (gy.dim(0) != B || gy.dim(1) != out_ch_ || gy.dim(2) != L)
      throw ShapeMismatch("conv1d backward: grad shape " + shape_string(gy.shape));
    Tensor<T> gx({B, in_ch_, L});
    const T* gyp = gy.data();
    const T* xp = x.data();
    const T* w = weight_.value.data();
    T* gxp = gx.data();
    T* gw = weight_.value.grad->data();
    T* gb = bias_.value.grad->data();

    // grad wrt input: the transposed convolution (taps flipped); each
    // (b, c) row is owned by one worker.
    parallel_for(0, B * in_ch_, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t bc = lo; bc < hi; ++bc) {
        const std::int64_t bb = bc / in_ch_, c = bc % in_ch_;
        T* out = gxp + (bb * in_ch_ + c) * L;
        for (std::int64_t o = 0; o < out_ch_; ++o)
          accumulate_row(out, gyp + (bb * out_ch_ + o) * L,
                         w + (o * in_ch_ + c) * kernel_, L, true);
      }
    });

    // grad wrt weights/bias: each output channel is owned by one worker, so
    // the reduction order over (b, t) is fixed and runs are reproducible.
    parallel_for(0, out_ch_, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t o = lo; o < hi; ++o) {
        T gbias = 0;
        for (std::int64_t bb = 0; bb < B; ++bb) {
          const T* g = gyp + (bb * out_ch_ + o) * L;
          for (std::int64_t t = 0; t < L; ++t) gbias += g[t];
          for (std::int64_t c = 0; c < in_ch_; ++c)
            weight_grad_row(gw + (o * in_ch_ + c) * kernel_, g,
                            xp + (bb * in_ch_ + c) * L, L);
        }
        gb[o] += gbias;
      }
    });
    return gx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }
  int out_channels() const { return static_cast<int>(out_ch_); }

 private:
  // out[t] += sum_j taps[j] * in[t + d*(j - center)], taps reversed when
  // flip is set (transposed convolution). Single pass over the interior
  // with all taps fused; the d*center samples at each edge run guarded.
  template <int K>
  static void accumulate_fused(T* out, const T* in, const T* taps, std::int64_t L,
                               std::int64_t d, bool flip) {
    constexpr int center = (K - 1) / 2;
    T w[K];
    for (int j = 0; j < K; ++j) w[j] = flip ? taps[K - 1 - j] : taps[j];
    const std::int64_t edge = std::min<std::int64_t>(d * center, L);
    for (std::int64_t t = 0; t < edge; ++t)
      for (int j = 0; j < K; ++j) {
        const std::int64_t s = t + d * (j - center);
        if (s >= 0 && s < L) out[t] += w[j] * in[s];
      }
    const T* base = in - d * center;
    for (std::int64_t t = edge; t < L - edge; ++t) {
      T acc = 0;
      for (int j = 0; j < K; ++j) acc += w[j] * base[t + d * j];
      out[t] += acc;
    }
    for (std::int64_t t = std::max(edge, L - edge); t < L; ++t)
      for (int j = 0; j < K; ++j) {
        const std::int64_t s = t + d * (j - center);
        if (s >= 0 && s < L) out[t] += w[j] * in[s];
      }
  }

  void accumulate_row(T* out, const T* in, const T* taps, std::int64_t L,
                      bool flip) const {
    const std::int64_t d = dilation_;
    switch (kernel_) {
      case 1: accumulate_fused<1>(out, in, taps, L, d, flip); return;
      case 3: accumulate_fused<3>(out, in, taps, L, d, flip); return;
      case 5: accumulate_fused<5>(out, in, taps, L, d, flip); return;
      case 7: accumulate_fused<7>(out, in, taps, L, d, flip); return;
      default: break;
    }
    const int center = (kernel_ - 1) / 2;
    for (int j = 0; j < kernel_; ++j) {
      const T wv = flip ? taps[kernel_ - 1 - j] : taps[j];
      const std::int64_t off = d * (j - center);
      const std::int64_t t0 = std::max<std::int64_t>(0, -off);
      const std::int64_t t1 = std::min<std::int64_t>(L, L - off);
      const T* src = in + off;
      for (std::int64_t t = t0; t < t1; ++t) out[t] += wv * src[t];
    }
  }

  // gw[j] += sum_t g[t] * in[t + d*(j - center)]: all tap dots in one pass.
  template <int K>
  static void weight_grad_fused(T* gw, const T* g, const T* in, std::int64_t L,
                                std::int64_t d) {
    constexpr int center = (K - 1) / 2;
    T acc[K] = {};
    const std::int64_t edge = std::min<std::int64_t>(d * center, L);
    for (std::int64_t t = 0; t < edge; ++t)
      for (int j = 0; j < K; ++j) {
        const std::int64_t s = t + d * (j - center);
        if (s >= 0 && s < L) acc[j] += g[t] * in[s];
      }
    const T* base = in - d * center;
    for (std::int64_t t = edge; t < L - edge; ++t) {
      const T gv = g[t];
      for (int j = 0; j < K; ++j) acc[j] += gv * base[t + d * j];
    }
    for (std::int64_t t = std::max(edge, L - edge); t < L; ++t)
      for (int j = 0; j < K; ++j) {
        const std::int64_t s = t + d * (j - center);
        if (s >= 0 && s < L) acc[j] += g[t] * in[s];
      }
    for (int j = 0; j < K; ++j) gw[j] += acc[j];
  }

  void weight_grad_row(T* gw, const T* g, const T* in, std::int64_t L) const {
    const std::int64_t d = dilation_;
    switch (kernel_) {
      case 1: weight_grad_fused<1>(gw, g, in, L, d); return;
      case 3: weight_grad_fused<3>(gw, g, in, L, d); return;
      case 5: weight_grad_fused<5>(gw, g, in, L, d); return;
      case 7: weight_grad_fused<7>(gw, g, in, L, d); return;
      default: break;
    }
    const int center = (kernel_ - 1) / 2;
    for (int j = 0; j < kernel_; ++j) {
      const std::int64_t off = d * (j - center);
      const std::int64_t t0 = std::max<std::int64_t>(0, -off);
      const std::int64_t t1 = std::min<std::int64_t>(L, L - off);
      const T* src = in + off;
      T acc = 0;
      for (std::int64_t t = t0; t < t1; ++t) acc += g[t] * src[t];
      gw[j] += acc;
    }
  }

  std::int64_t in_ch_, out_ch_;
  int kernel_, dilation_;
  Param<T> weight_, bias_;
  Tensor<T> cached_input_;
};

// Per-channel batch normalization over (B, L), with running statistics for
// eval mode. Momentum 0.1, eps 1e-5 (running variance stored unbiased).
template <class T>
class BatchNorm1d {
 public:
  BatchNorm1d(std::string name, int channels, double momentum = 0.1,
              double eps = 1e-5)
      : name_(name),
        channels_(channels),
        momentum_(momentum),
        eps_(eps),
        gamma_(name + ".gamma", {channels}),
        beta_(name + ".beta", {channels}),
        running_mean_(channels, T(0)),
        running_var_(channels, T(1)) {
    std::fill(gamma_.value.values.begin(), gamma_.value.values.end(), T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_shape(x, 3, "batchnorm input");
    if (x.dim(1) != channels_)
      throw ShapeMismatch("batchnorm: channel mismatch");
    const std::int64_t B = x.dim(0), C = channels_, L = x.dim(2);
    const std::int64_t n = B * L;
    Tensor<T> y(x.shape);
    const T* xp = x.data();
    T* yp = y.data();
    const T* gam = gamma_.value.data();
    const T* bet = beta_.value.data();

    if (mode == Mode::train) {
      if (n < 2) throw DegenerateBatch("batchnorm needs B*L >= 2 in train mode");
      xhat_ = Tensor<T>(x.shape);
      invstd_.assign(C, T(0));
      T* xh = xhat_.data();
      parallel_for(0, C, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t c = lo; c < hi; ++c) {
          double sum = 0.0, sumsq = 0.0;
          for (std::int64_t bb = 0; bb < B; ++bb) {
            const T* in = xp + (bb * C + c) * L;
            for (std::int64_t t = 0; t < L; ++t) {
              sum += in[t];
              sumsq += static_cast<double>(in[t]) * in[t];
            }
          }
          const double mean = sum / static_cast<double>(n);
          const double var =
              std::max(sumsq / static_cast<double>(n) - mean * mean, 0.0);
          const double istd = 1.0 / std::sqrt(var + eps_);
          invstd_[c] = static_cast<T>(istd);
          for (std::int64_t bb = 0; bb < B; ++bb) {
            const T* in = xp + (bb * C + c) * L;
            T* xhrow = xh + (bb * C + c) * L;
            T* yrow = yp + (bb * C + c) * L;
            for (std::int64_t t = 0; t < L; ++t) {
              const T v = static_cast<T>((in[t] - mean) * istd);
              xhrow[t] = v;
              yrow[t] = gam[c] * v + bet[c];
            }
          }
          const double unbiased = n > 1 ? var * n / (n - 1.0) : var;
          running_mean_[c] =
              static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
          running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] +
                                           momentum_ * unbiased);
        }
      });
      batch_ = B;
      length_ = L;
    } else {
      parallel_for(0, C, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t c = lo; c < hi; ++c) {
          const double istd =
              1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
          const double mean = running_mean_[c];
          for (std::int64_t bb = 0; bb < B; ++bb) {
            const T* in = xp + (bb * C + c) * L;
            T* yrow = yp + (bb * C + c) * L;
            for (std::int64_t t = 0; t < L; ++t)
              yrow[t] = static_cast<T>(gam[c] * ((in[t] - mean) * istd) + bet[c]);
          }
        }
      });
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    const std::int64_t B = batch_, C = channels_, L = length_;
    if (gy.dim(0) != B || gy.dim(1) != C || gy.dim(2) != L)
      throw ShapeMismatch("batchnorm backward: grad shape");
    const std::int64_t n = B * L;
    Tensor<T> gx(gy.shape);
    const T* gyp = gy.data();
    const T* xh = xhat_.data();
    T* gxp = gx.data();
    T* ggam = gamma_.value.grad->data();
    T* gbet = beta_.value.grad->data();
    const T* gam = gamma_.value.data();

    parallel_for(0, C, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t c = lo; c < hi; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::int64_t bb = 0; bb < B; ++bb) {
          const T* g = gyp + (bb * C + c) * L;
          const T* h = xh + (bb * C + c) * L;
          for (std::int64_t t = 0; t < L; ++t) {
            sum_gy += g[t];
            sum_gy_xhat += static_cast<double>(g[t]) * h[t];
          }
        }
        ggam[c] += static_cast<T>(sum_gy_xhat);
        gbet[c] += static_cast<T>(sum_gy);
        const double mean_gy = sum_gy / static_cast<double>(n);
        const double mean_gy_xhat = sum_gy_xhat / static_cast<double>(n);
        const double scale = static_cast<double>(gam[c]) * invstd_[c];
        for (std::int64_t bb = 0; bb < B; ++bb) {
          const T* g = gyp + (bb * C + c) * L;
          const T* h = xh + (bb * C + c) * L;
          T* out = gxp + (bb * C + c) * L;
          for (std::int64_t t = 0; t < L; ++t)
            out[t] = static_cast<T>(scale * (g[t] - mean_gy - h[t] * mean_gy_xhat));
        }
      }
    });
    return gx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }

  // Running statistics are buffers, not parameters; checkpoints carry them
  // so eval-mode predictions survive a save/load round trip.
  void collect_buffers(std::vector<std::pair<std::string, std::vector<T>*>>& out) {
    out.emplace_back(name_ + ".running_mean", &running_mean_);
    out.emplace_back(name_ + ".running_var", &running_var_);
  }

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  std::vector<T>& running_mean() { return running_mean_; }
  std::vector<T>& running_var() { return running_var_; }

 private:
  std::string name_;
  std::int64_t channels_;
  double momentum_, eps_;
  Param<T> gamma_, beta_;
  std::vector<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<T> invstd_;
  std::int64_t batch_ = 0, length_ = 0;
};

template <class T>
class ReLU {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> y(x.shape);
    const std::size_t n = x.values.size();
    if (mode == Mode::train) {
      mask_.resize(n);
      parallel_for(0, static_cast<std::int64_t>(n),
                   [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t i = lo; i < hi; ++i) {
                       const bool pos = x.values[i] > T(0);
                       y.values[i] = pos ? x.values[i] : T(0);
                       mask_[i] = pos;
                     }
                   });
    } else {
      parallel_for(0, static_cast<std::int64_t>(n),
                   [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t i = lo; i < hi; ++i)
                       y.values[i] = x.values[i] > T(0) ? x.values[i] : T(0);
                   });
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    if (gy.values.size() != mask_.size())
      throw ShapeMismatch("relu backward: grad size");
    Tensor<T> gx(gy.shape);
    for (std::size_t i = 0; i < gy.values.size(); ++i)
      gx.values[i] = mask_[i] ? gy.values[i] : T(0);
    return gx;
  }

 private:
  std::vector<unsigned char> mask_;
};

// Non-overlapping max pooling; floor(L/w) windows, tail dropped. Backward
// routes the gradient to the first argmax of each window.
template <class T>
class MaxPool1d {
 public:
  explicit MaxPool1d(int window) : window_(window) {
    if (window < 1) throw ConfigInvalid("pool window must be >= 1");
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_shape(x, 3, "maxpool input");
    const std::int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    if (window_ > L)
      throw WindowLargerThanLength("pool window " + std::to_string(window_) +
                                   " exceeds length " + std::to_string(L));
    const std::int64_t out_len = L / window_;
    Tensor<T> y({B, C, out_len});
    if (mode == Mode::train) {
      argmax_.assign(static_cast<std::size_t>(B * C * out_len), 0);
      in_shape_ = x.shape;
    }
    const T* xp = x.data();
    T* yp = y.data();
    for (std::int64_t bc = 0; bc < B * C; ++bc) {
      const T* in = xp + bc * L;
      T* out = yp + bc * out_len;
      for (std::int64_t o = 0; o < out_len; ++o) {
        const std::int64_t base = o * window_;
        std::int64_t best = base;
        for (int j = 1; j < window_; ++j)
          if (in[base + j] > in[best]) best = base + j;
        out[o] = in[best];
        if (mode == Mode::train) argmax_[bc * out_len + o] = best;
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    Tensor<T> gx(in_shape_);
    const std::int64_t L = in_shape_[2];
    const std::int64_t out_len = L / window_;
    if (gy.values.size() != argmax_.size())
      throw ShapeMismatch("maxpool backward: grad size");
    const T* gyp = gy.data();
    T* gxp = gx.data();
    for (std::int64_t bc = 0; bc < in_shape_[0] * in_shape_[1]; ++bc)
      for (std::int64_t o = 0; o < out_len; ++o)
        gxp[bc * L + argmax_[bc * out_len + o]] += gyp[bc * out_len + o];
    return gx;
  }

 private:
  int window_;
  std::vector<std::int64_t> argmax_;
  std::vector<std::int64_t> in_shape_;
};

// Max over the whole length axis: [B, C, L] -> [B, C].
template <class T>
class GlobalMaxPool {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_shape(x, 3, "global maxpool input");
    const std::int64_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    Tensor<T> y({B, C});
    if (mode == Mode::train) {
      argmax_.assign(static_cast<std::size_t>(B * C), 0);
      in_shape_ = x.shape;
    }
    const T* xp = x.data();
    for (std::int64_t bc = 0; bc < B * C; ++bc) {
      const T* in = xp + bc * L;
      std::int64_t best = 0;
      for (std::int64_t t = 1; t < L; ++t)
        if (in[t] > in[best]) best = t;
      y.values[bc] = in[best];
      if (mode == Mode::train) argmax_[bc] = best;
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    if (gy.values.size() != argmax_.size())
      throw ShapeMismatch("global maxpool backward: grad size");
    Tensor<T> gx(in_shape_);
    const std::int64_t L = in_shape_[2];
    for (std::size_t bc = 0; bc < argmax_.size(); ++bc)
      gx.values[bc * L + argmax_[bc]] = gy.values[bc];
    return gx;
  }

 private:
  std::vector<std::int64_t> argmax_;
  std::vector<std::int64_t> in_shape_;
};

// y = x W^T + b with W of shape [out, in].
template <class T>
class Linear {
 public:
  Linear(std::string name, int in_features, int out_features, Rng& rng)
      : in_(in_features),
        out_(out_features),
        weight_(name + ".weight", {out_features, in_features}),
        bias_(name + ".bias", {out_features}) {
    const double bound = std::sqrt(6.0 / in_features);
    for (auto& w : weight_.value.values)
      w = static_cast<T>(rng.uniform(-bound, bound));
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    check_shape(x, 2, "linear input");
    if (x.dim(1) != in_) throw ShapeMismatch("linear: feature mismatch");
    const std::int64_t B = x.dim(0);
    Tensor<T> y({B, out_});
    const T* xp = x.data();
    const T* w = weight_.value.data();
    const T* b = bias_.value.data();
    for (std::int64_t bb = 0; bb < B; ++bb)
      for (std::int64_t o = 0; o < out_; ++o) {
        T acc = b[o];
        const T* wr = w + o * in_;
        const T* xr = xp + bb * in_;
        for (std::int64_t i = 0; i < in_; ++i) acc += wr[i] * xr[i];
        y.values[bb * out_ + o] = acc;
      }
    if (mode == Mode::train) cached_input_ = x;
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) {
    const Tensor<T>& x = cached_input_;
    const std::int64_t B = x.dim(0);
    if (gy.dim(0) != B || gy.dim(1) != out_)
      throw ShapeMismatch("linear backward: grad shape");
    Tensor<T> gx({B, in_});
    const T* gyp = gy.data();
    const T* xp = x.data();
    const T* w = weight_.value.data();
    T* gw = weight_.value.grad->data();
    T* gb = bias_.value.grad->data();
    for (std::int64_t bb = 0; bb < B; ++bb) {
      const T* g = gyp + bb * out_;
      const T* xr = xp + bb * in_;
      T* gxr = gx.data() + bb * in_;
      for (std::int64_t o = 0; o < out_; ++o) {
        gb[o] += g[o];
        const T* wr = w + o * in_;
        T* gwr = gw + o * in_;
        for (std::int64_t i = 0; i < in_; ++i) {
          gxr[i] += g[o] * wr[i];
          gwr[i] += g[o] * xr[i];
        }
      }
    }
    return gx;
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  std::int64_t in_, out_;
  Param<T> weight_, bias_;
  Tensor<T> cached_input_;
};

template <class T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad_logits;
  Tensor<T> probs;
};

// Row-max-stabilized softmax probabilities.
template <class T>
Tensor<T> softmax(const Tensor<T>& logits) {
  check_shape(logits, 2, "softmax input");
  const std::int64_t B = logits.dim(0), C = logits.dim(1);
  Tensor<T> probs(logits.shape);
  for (std::int64_t b = 0; b < B; ++b) {
    const T* row = logits.data() + b * C;
    T* out = probs.data() + b * C;
    T mx = row[0];
    for (std::int64_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
    double denom = 0.0;
    for (std::int64_t c = 0; c < C; ++c) {
      const double e = std::exp(static_cast<double>(row[c] - mx));
      out[c] = static_cast<T>(e);
      denom += e;
    }
    for (std::int64_t c = 0; c < C; ++c)
      out[c] = static_cast<T>(out[c] / denom);
  }
  return probs;
}

// Mean cross-entropy over the batch; grad = (softmax - onehot) / B.
template <class T>
LossResult<T> softmax_crossentropy(const Tensor<T>& logits,
                                   const std::vector<int>& targets) {
  check_shape(logits, 2, "loss input");
  const std::int64_t B = logits.dim(0), C = logits.dim(1);
  if (static_cast<std::int64_t>(targets.size()) != B)
    throw ShapeMismatch("loss: target count mismatch");
  for (int t : targets)
    if (t < 0 || t >= C)
      throw TargetOutOfRange("target " + std::to_string(t) + " outside [0, " +
                             std::to_string(C) + ")");
  LossResult<T> res;
  res.probs = softmax(logits);
  res.grad_logits = Tensor<T>(logits.shape);
  double total = 0.0;
  for (std::int64_t b = 0; b < B; ++b) {
    const T* p = res.probs.data() + b * C;
    T* g = res.grad_logits.data() + b * C;
    total -= std::log(std::max(static_cast<double>(p[targets[b]]), 1e-300));
    for (std::int64_t c = 0; c < C; ++c)
      g[c] = static_cast<T>((static_cast<double>(p[c]) -
                             (c == targets[b] ? 1.0 : 0.0)) /
                            static_cast<double>(B));
  }
  res.loss = total / static_cast<double>(B);
  return res;
}

}  // namespace synthattr::nn
