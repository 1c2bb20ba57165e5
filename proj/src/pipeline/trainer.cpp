#include "synthattr/pipeline/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "synthattr/audio/clip.hpp"
#include "synthattr/classical/gmm.hpp"
#include "synthattr/classical/svm.hpp"
#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"
#include "synthattr/dsp/features.hpp"
#include "synthattr/models/tssdnet.hpp"

namespace synthattr::pipeline {

namespace fs = std::filesystem;

namespace {

std::string config_string(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [key, value] : cfg.to_map()) {
    if (!out.empty()) out += ' ';
    out += key + "=" + value;
  }
  return out;
}

ExperimentConfig config_from_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigInvalid("bad config token: " + token);
    kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return ExperimentConfig::from_map(kv);
}

dsp::MfccParams mfcc_params_for(const ExperimentConfig& cfg) {
  dsp::MfccParams params;
  params.n_mfcc = cfg.mfcc_coeffs;
  params.n_mels = cfg.mel_bands;
  params.stft.frame_length = static_cast<int>(std::lround(0.025 * cfg.sample_rate));
  params.stft.hop_length = static_cast<int>(std::lround(0.010 * cfg.sample_rate));
  params.f_min = 20.0;
  params.f_max = std::min(8000.0, cfg.sample_rate / 2.0);
  return params;
}

audio::AudioClip ingest(const std::string& path, int sample_rate) {
  return audio::resample(audio::load_wav(path), sample_rate);
}

std::vector<const ManifestEntry*> split_entries(const DatasetManifest& manifest,
                                                Split split) {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : manifest.entries)
    if (e.split == split) out.push_back(&e);
  return out;
}

}  // namespace

WaveDataset load_waveforms(const DatasetManifest& manifest, Split split,
                           double clip_seconds, int sample_rate) {
  const auto entries = split_entries(manifest, split);
  if (entries.empty()) throw EmptySplit("no entries in split " + split_name(split));
  WaveDataset ds;
  ds.length = std::llround(clip_seconds * sample_rate);
  ds.waves.resize(entries.size());
  ds.labels.resize(entries.size());
  parallel_for(0, static_cast<std::int64_t>(entries.size()),
               [&](std::int64_t lo, std::int64_t hi) {
                 for (std::int64_t i = lo; i < hi; ++i) {
                   const auto& e = *entries[i];
                   auto clip =
                       ingest((fs::path(manifest.root) / e.relative_path).string(),
                              sample_rate);
                   clip = audio::normalize_length(clip, clip_seconds);
                   ds.waves[i].assign(clip.samples.begin(), clip.samples.end());
                   ds.labels[i] = e.label;
                 }
               });
  return ds;
}

std::pair<Matrix, std::vector<int>> load_pooled_features(
    const DatasetManifest& manifest, Split split, const ExperimentConfig& cfg) {
  const auto entries = split_entries(manifest, split);
  if (entries.empty()) throw EmptySplit("no entries in split " + split_name(split));
  const auto params = mfcc_params_for(cfg);
  const std::size_t width = 2 * static_cast<std::size_t>(
      cfg.feature == FeatureId::mfcc ? cfg.mfcc_coeffs : cfg.mel_bands);
  Matrix feats(entries.size(), width);
  std::vector<int> labels(entries.size());
  parallel_for(0, static_cast<std::int64_t>(entries.size()),
               [&](std::int64_t lo, std::int64_t hi) {
                 for (std::int64_t i = lo; i < hi; ++i) {
                   const auto& e = *entries[i];
                   const auto clip =
                       ingest((fs::path(manifest.root) / e.relative_path).string(),
                              cfg.sample_rate);
                   dsp::FeatureMatrix fm;
                   if (cfg.feature == FeatureId::mfcc) {
                     fm = dsp::mfcc(clip, params);
                   } else {
                     fm = dsp::mel_spectrogram(dsp::stft_power(clip, params.stft),
                                               params.n_mels, params.f_min,
                                               params.f_max);
                   }
                   const auto pooled = dsp::mfcc_stats(fm);
                   std::copy(pooled.begin(), pooled.end(), feats.row(i));
                   labels[i] = e.label;
                 }
               });
  return {std::move(feats), std::move(labels)};
}

namespace {

template <class T>
nn::Tensor<T> assemble_batch(const WaveDataset& ds,
                             const std::vector<std::size_t>& order,
                             std::size_t begin, std::size_t end) {
  const std::int64_t B = static_cast<std::int64_t>(end - begin);
  nn::Tensor<T> x({B, 1, ds.length});
  for (std::int64_t b = 0; b < B; ++b) {
    const auto& wave = ds.waves[order[begin + b]];
    T* dst = x.data() + b * ds.length;
    for (std::int64_t t = 0; t < ds.length; ++t) dst[t] = static_cast<T>(wave[t]);
  }
  return x;
}

template <class T, class Model>
double eval_accuracy(Model& model, const WaveDataset& ds, int batch_size) {
  std::vector<std::size_t> order(ds.waves.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(order.size(), begin + batch_size);
    auto x = assemble_batch<T>(ds, order, begin, end);
    const auto logits = model.forward(x, nn::Mode::eval);
    const std::int64_t C = logits.dim(1);
    for (std::size_t b = 0; b < end - begin; ++b) {
      const T* row = logits.data() + b * C;
      std::int64_t best = 0;
      for (std::int64_t c = 1; c < C; ++c)
        if (row[c] > row[best]) best = c;
      correct += best == ds.labels[order[begin + b]];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(order.size());
}

void write_log_csv(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "epoch,lr,train_loss,train_accuracy,val_accuracy\n";
  os.precision(17);
  for (const auto& row : log)
    os << row.epoch << ',' << row.lr << ',' << row.train_loss << ','
       << row.train_accuracy << ',' << row.val_accuracy << '\n';
}

template <class T, class Model>
TrainResult run_epoch_loop(Model& model, const char* arch_id,
                           const ExperimentConfig& cfg, const WaveDataset& train,
                           const WaveDataset& val, const std::string& out_dir) {
  nn::Optimizer<T> optimizer(model.params(), cfg.train.optimizer);
  TrainResult result;
  nn::Checkpoint best;
  const std::string experiment = config_string(cfg);

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    const double lr = nn::lr_at(cfg.train, epoch);
    std::vector<std::size_t> order(train.waves.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.train.seed, "epoch-shuffle",
                                static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.integer(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.train.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.train.batch_size));
      auto x = assemble_batch<T>(train, order, begin, end);
      std::vector<int> targets(end - begin);
      for (std::size_t b = 0; b < targets.size(); ++b)
        targets[b] = train.labels[order[begin + b]];

      optimizer.zero_grad();
      const auto logits = model.forward(x, nn::Mode::train);
      const auto loss = nn::softmax_crossentropy(logits, targets);
      if (!std::isfinite(loss.loss))
        throw NonFiniteLoss("non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch offset " + std::to_string(begin));
      loss_sum += loss.loss * static_cast<double>(end - begin);
      const std::int64_t C = logits.dim(1);
      for (std::size_t b = 0; b < targets.size(); ++b) {
        const T* row = logits.data() + b * C;
        std::int64_t bestc = 0;
        for (std::int64_t c = 1; c < C; ++c)
          if (row[c] > row[bestc]) bestc = c;
        correct += bestc == targets[b];
      }
      model.backward(loss.grad_logits);
      optimizer.step(lr);
    }

    EpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(order.size());
    row.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(order.size());
    row.val_accuracy = eval_accuracy<T>(model, val, cfg.train.batch_size);
    result.log.push_back(row);

    if (row.val_accuracy > result.best_val_accuracy || result.best_epoch < 0) {
      result.best_val_accuracy = row.val_accuracy;
      result.best_epoch = epoch;
      best = model.to_checkpoint();
      best.config = experiment;
    }
    if (cfg.stop_val_accuracy > 0.0 && row.val_accuracy >= cfg.stop_val_accuracy)
      break;
  }

  fs::create_directories(out_dir);
  write_config_file((fs::path(out_dir) / "config.snapshot").string(), cfg.to_map());
  write_log_csv((fs::path(out_dir) / "log.csv").string(), result.log);
  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
  nn::write_checkpoint(result.checkpoint_path, best);
  auto last = model.to_checkpoint();
  last.config = experiment;
  result.last_checkpoint_path = (fs::path(out_dir) / "checkpoint.last.bin").string();
  nn::write_checkpoint(result.last_checkpoint_path, last);
  (void)arch_id;
  return result;
}

template <class T>
TrainResult train_tssd(const ExperimentConfig& cfg, const DatasetManifest& manifest,
                       const std::string& out_dir) {
  const auto train =
      load_waveforms(manifest, Split::train, cfg.clip_seconds, cfg.sample_rate);
  const auto val =
      load_waveforms(manifest, Split::val, cfg.clip_seconds, cfg.sample_rate);
  for (int label : train.labels)
    if (label < 0 || label >= cfg.num_classes)
      throw DataError("training label outside [0, num_classes)");

  if (cfg.model == ModelId::inc_tssd) {
    models::IncTssdConfig mc;
    mc.branch_channels = cfg.inc_branch_channels;
    mc.num_blocks = cfg.inc_blocks;
    mc.penultimate_width = cfg.penultimate_width;
    mc.num_classes = cfg.num_classes;
    models::IncTssdNet<T> model(mc, cfg.train.seed);
    return run_epoch_loop<T>(model, models::kIncTssdArchId, cfg, train, val, out_dir);
  }
  models::ResTssdConfig mc;
  mc.stage_channels = cfg.res_stage_channels;
  mc.blocks_per_stage = cfg.res_blocks_per_stage;
  mc.penultimate_width = cfg.penultimate_width;
  mc.num_classes = cfg.num_classes;
  models::ResTssdNet<T> model(mc, cfg.train.seed);
  return run_epoch_loop<T>(model, models::kResTssdArchId, cfg, train, val, out_dir);
}

TrainResult train_classical(const ExperimentConfig& cfg,
                            const DatasetManifest& manifest,
                            const std::string& out_dir) {
  auto [train_x, train_y] = load_pooled_features(manifest, Split::train, cfg);
  auto [val_x, val_y] = load_pooled_features(manifest, Split::val, cfg);

  fs::create_directories(out_dir);
  write_config_file((fs::path(out_dir) / "config.snapshot").string(), cfg.to_map());
  TrainResult result;
  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();

  if (cfg.model == ModelId::svm) {
    classical::SvmTrainOptions options;
    options.lambda = cfg.svm_lambda;
    options.epochs = cfg.svm_epochs;
    options.seed = cfg.train.seed;
    auto model = classical::svm_train(train_x, train_y, options);
    model.feature_config = config_string(cfg);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < val_x.rows; ++r) {
      std::vector<double> x(val_x.row(r), val_x.row(r) + val_x.cols);
      correct += classical::svm_predict(model, x).first == val_y[r];
    }
    result.best_val_accuracy =
        static_cast<double>(correct) / static_cast<double>(val_x.rows);
    result.best_epoch = cfg.svm_epochs - 1;
    for (int e = 0; e < cfg.svm_epochs; ++e) {
      EpochLog row;
      row.epoch = e;
      row.train_loss = model.epoch_objectives[e];
      row.val_accuracy = e + 1 == cfg.svm_epochs ? result.best_val_accuracy : 0.0;
      result.log.push_back(row);
    }
    classical::save_svm(result.checkpoint_path, model);
    classical::export_svm_weights_csv((fs::path(out_dir) / "svm_weights.csv").string(),
                                      model);
  } else {
    classical::GmmTrainOptions options;
    options.components = cfg.gmm_components;
    options.seed = cfg.train.seed;
    auto model = classical::gmm_fit(train_x, train_y, options);
    model.feature_config = config_string(cfg);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < val_x.rows; ++r) {
      std::vector<double> x(val_x.row(r), val_x.row(r) + val_x.cols);
      correct += classical::gmm_predict(model, x).first == val_y[r];
    }
    result.best_val_accuracy =
        static_cast<double>(correct) / static_cast<double>(val_x.rows);
    result.best_epoch = 0;
    EpochLog row;
    row.val_accuracy = result.best_val_accuracy;
    result.log.push_back(row);
    classical::save_gmm(result.checkpoint_path, model);
  }
  write_log_csv((fs::path(out_dir) / "log.csv").string(), result.log);
  return result;
}

}  // namespace

TrainResult train_model(const ExperimentConfig& cfg, const DatasetManifest& manifest,
                        const std::string& out_dir) {
  cfg.validate();
  if (cfg.threads > 0) set_parallel_threads(cfg.threads);
  if (manifest.count_in(Split::train) == 0) throw EmptySplit("empty train split");
  if (manifest.count_in(Split::val) == 0) throw EmptySplit("empty val split");

  switch (cfg.model) {
    case ModelId::inc_tssd:
    case ModelId::res_tssd:
      return cfg.train.precision == nn::Precision::float64
                 ? train_tssd<double>(cfg, manifest, out_dir)
                 : train_tssd<float>(cfg, manifest, out_dir);
    case ModelId::svm:
    case ModelId::gmm:
      return train_classical(cfg, manifest, out_dir);
  }
  throw ConfigInvalid("bad model id");
}

namespace {

std::string sniff_magic(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  char magic[8] = {};
  is.read(magic, 8);
  return std::string(magic, 8);
}

struct LoadedNnModel {
  ExperimentConfig cfg;
  std::unique_ptr<models::IncTssdNet<float>> inc;
  std::unique_ptr<models::ResTssdNet<float>> res;

  nn::Tensor<float> forward(const nn::Tensor<float>& x) {
    return inc ? inc->forward(x, nn::Mode::eval) : res->forward(x, nn::Mode::eval);
  }
  nn::Tensor<float> embed(const nn::Tensor<float>& x) {
    return inc ? inc->embed(x) : res->embed(x);
  }
};

LoadedNnModel load_nn_model(const std::string& path) {
  const auto ckpt = nn::read_checkpoint(path);
  LoadedNnModel loaded;
  loaded.cfg = config_from_string(ckpt.config);
  if (ckpt.arch_id == models::kIncTssdArchId) {
    models::IncTssdConfig mc;
    mc.branch_channels = loaded.cfg.inc_branch_channels;
    mc.num_blocks = loaded.cfg.inc_blocks;
    mc.penultimate_width = loaded.cfg.penultimate_width;
    mc.num_classes = loaded.cfg.num_classes;
    loaded.inc = std::make_unique<models::IncTssdNet<float>>(mc, 0);
    loaded.inc->restore(ckpt);
  } else if (ckpt.arch_id == models::kResTssdArchId) {
    models::ResTssdConfig mc;
    mc.stage_channels = loaded.cfg.res_stage_channels;
    mc.blocks_per_stage = loaded.cfg.res_blocks_per_stage;
    mc.penultimate_width = loaded.cfg.penultimate_width;
    mc.num_classes = loaded.cfg.num_classes;
    loaded.res = std::make_unique<models::ResTssdNet<float>>(mc, 0);
    loaded.res->restore(ckpt);
  } else {
    throw DataError(path + ": unknown architecture id " + ckpt.arch_id);
  }
  return loaded;
}

constexpr char kNnMagic[] = "SATCKPT1";
constexpr char kSvmMagicStr[] = "SATSVM01";
constexpr char kGmmMagicStr[] = "SATGMM01";

// Predicted label per entry of the split, manifest order.
std::vector<int> predict_split(const std::string& model_path,
                               const DatasetManifest& manifest, Split split,
                               std::vector<int>* labels_out) {
  const auto entries = split_entries(manifest, split);
  if (entries.empty()) throw EmptySplit("no entries in split " + split_name(split));
  const std::string magic = sniff_magic(model_path);
  std::vector<int> predictions(entries.size(), -1);
  if (labels_out) {
    labels_out->resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
      (*labels_out)[i] = entries[i]->label;
  }

  if (magic == kNnMagic) {
    auto loaded = load_nn_model(model_path);
    const auto ds = load_waveforms(manifest, split, loaded.cfg.clip_seconds,
                                   loaded.cfg.sample_rate);
    std::vector<std::size_t> order(ds.waves.size());
    std::iota(order.begin(), order.end(), 0);
    const int batch = loaded.cfg.train.batch_size;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(batch)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(batch));
      auto x = assemble_batch<float>(ds, order, begin, end);
      const auto logits = loaded.forward(x);
      const std::int64_t C = logits.dim(1);
      for (std::size_t b = 0; b < end - begin; ++b) {
        const float* row = logits.data() + b * C;
        std::int64_t best = 0;
        for (std::int64_t c = 1; c < C; ++c)
          if (row[c] > row[best]) best = c;
        predictions[begin + b] = static_cast<int>(best);
      }
    }
  } else if (magic == kSvmMagicStr || magic == kGmmMagicStr) {
    classical::SvmModel svm;
    classical::GmmModel gmm;
    ExperimentConfig cfg;
    if (magic == kSvmMagicStr) {
      svm = classical::load_svm(model_path);
      cfg = config_from_string(svm.feature_config);
    } else {
      gmm = classical::load_gmm(model_path);
      cfg = config_from_string(gmm.feature_config);
    }
    auto [feats, labels] = load_pooled_features(manifest, split, cfg);
    for (std::size_t r = 0; r < feats.rows; ++r) {
      std::vector<double> x(feats.row(r), feats.row(r) + feats.cols);
      predictions[r] = magic == kSvmMagicStr ? classical::svm_predict(svm, x).first
                                             : classical::gmm_predict(gmm, x).first;
    }
  } else {
    throw DataError(model_path + ": unrecognized model file");
  }
  return predictions;
}

}  // namespace

std::pair<double, ConfusionMatrix> evaluate_model(const std::string& model_path,
                                                  const DatasetManifest& manifest,
                                                  Split split,
                                                  const std::string& out_dir) {
  std::vector<int> labels;
  const auto predictions = predict_split(model_path, manifest, split, &labels);
  int class_count = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    class_count = std::max({class_count, labels[i] + 1, predictions[i] + 1});
  ConfusionMatrix cm(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;  // unlabeled entries do not count
    cm.at(labels[i], predictions[i])++;
  }
  const double accuracy = cm.accuracy();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_confusion_csv((fs::path(out_dir) / "confusion.csv").string(), cm);
    std::ostringstream title;
    title.precision(4);
    title << "confusion (" << split_name(split) << "), accuracy " << accuracy;
    write_confusion_svg((fs::path(out_dir) / "confusion.svg").string(), cm,
                        title.str());
  }
  return {accuracy, cm};
}

void predict_unlabeled(const std::string& model_path,
                       const DatasetManifest& manifest, const std::string& out_csv) {
  std::ofstream os(out_csv);
  if (!os) throw IoFailure("cannot open " + out_csv + " for writing");
  os << "relative_path,predicted_label\n";

  const auto entries = split_entries(manifest, Split::eval);
  if (entries.empty()) return;  // header-only CSV

  // Missing files must not abort the whole run: predict per present file,
  // mark the absent ones failed.
  DatasetManifest present = manifest;
  present.entries.clear();
  std::vector<bool> exists(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    exists[i] = fs::exists(fs::path(manifest.root) / entries[i]->relative_path);
    if (exists[i]) present.entries.push_back(*entries[i]);
  }

  std::vector<int> predictions;
  if (!present.entries.empty())
    predictions = predict_split(model_path, present, Split::eval, nullptr);

  std::size_t next = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    os << entries[i]->relative_path << ',';
    if (exists[i])
      os << predictions[next++];
    else
      os << "failed";
    os << '\n';
  }
}

std::pair<Matrix, std::vector<int>> embeddings_for_split(
    const std::string& model_path, const DatasetManifest& manifest, Split split) {
  const auto entries = split_entries(manifest, split);
  if (entries.empty()) throw EmptySplit("no entries in split " + split_name(split));
  const std::string magic = sniff_magic(model_path);
  std::vector<int> labels(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) labels[i] = entries[i]->label;

  if (magic == kNnMagic) {
    auto loaded = load_nn_model(model_path);
    const auto ds = load_waveforms(manifest, split, loaded.cfg.clip_seconds,
                                   loaded.cfg.sample_rate);
    std::vector<std::size_t> order(ds.waves.size());
    std::iota(order.begin(), order.end(), 0);
    Matrix emb(entries.size(), static_cast<std::size_t>(loaded.cfg.penultimate_width));
    const int batch = loaded.cfg.train.batch_size;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(batch)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(batch));
      auto x = assemble_batch<float>(ds, order, begin, end);
      const auto e = loaded.embed(x);
      for (std::size_t b = 0; b < end - begin; ++b)
        for (std::size_t c = 0; c < emb.cols; ++c)
          emb.at(begin + b, c) = e.values[b * emb.cols + c];
    }
    return {std::move(emb), std::move(labels)};
  }

  ExperimentConfig cfg;
  if (magic == kSvmMagicStr)
    cfg = config_from_string(classical::load_svm(model_path).feature_config);
  else if (magic == kGmmMagicStr)
    cfg = config_from_string(classical::load_gmm(model_path).feature_config);
  else
    throw DataError(model_path + ": unrecognized model file");
  return load_pooled_features(manifest, split, cfg);
}

}  // namespace synthattr::pipeline
