#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthattr/augment/augment.hpp"
#include "synthattr/common/matrix.hpp"
#include "synthattr/nn/optimizer.hpp"
#include "synthattr/pipeline/manifest.hpp"

namespace synthattr::pipeline {

// Per-class seeded shuffle followed by proportional slicing; the rounding
// residue goes to train, so splits are disjoint and exhaustive over the
// labeled entries. Unlabeled entries keep their split.
DatasetManifest stratified_split(const DatasetManifest& manifest,
                                 double train_fraction, double val_fraction,
                                 double test_fraction, std::uint64_t seed);

// Parametric signature of one synthesizer stand-in class.
struct FixtureClassSpec {
  double f0_hz = 120.0;            // fundamental of the harmonic stack
  int harmonics = 8;
  double harmonic_decay = 0.8;     // amplitude ratio between harmonics
  double noise_mix = 0.2;          // filtered-noise excitation level
  double tilt_db_per_octave = 0.0; // spectral tilt of the noise bed
  double vibrato_hz = 5.0;
  double vibrato_depth = 0.01;
  double duration_mean_s = 6.0;
  double duration_std_s = 0.0;
};

struct FixtureSpec {
  std::vector<FixtureClassSpec> classes;
  int per_class = 10;
  int sample_rate = 16000;
  std::uint64_t seed = 0;

  // Six classes with distinct fundamentals, tilts and noise levels;
  // durations follow the per-class spread of the corpus this stands in
  // for (8.26/2.75, 6.43/2.08, 6.36/2.12, 8.14/2.56, 5.62/1.91,
  // 6.79/2.22 seconds).
  static FixtureSpec standard(int classes, int per_class, std::uint64_t seed);
};

// Synthesizes WAV clips with class-dependent signatures and writes a
// balanced manifest (manifest.csv) under out_dir. Byte-identical for a
// given seed.
DatasetManifest generate_fixture_corpus(const FixtureSpec& spec,
                                        const std::string& out_dir);

// In-memory clip synthesis (used by the generator and by tests).
std::vector<double> synthesize_fixture_clip(const FixtureClassSpec& cls,
                                            double duration_s, int sample_rate,
                                            std::uint64_t seed);

struct ConfusionMatrix {
  std::vector<std::int64_t> counts;  // C x C, rows = true, cols = predicted
  int class_count = 0;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : counts(static_cast<std::size_t>(classes) * classes, 0),
        class_count(classes) {}
  std::int64_t& at(int truth, int predicted) {
    return counts[static_cast<std::size_t>(truth) * class_count + predicted];
  }
  std::int64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * class_count + predicted];
  }
  std::int64_t total() const;
  double accuracy() const;  // trace / total
};

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);
void write_confusion_svg(const std::string& path, const ConfusionMatrix& cm,
                         const std::string& title);

enum class ModelId { inc_tssd, res_tssd, svm, gmm };
enum class FeatureId { rw, ms, mfcc };

std::string model_id_name(ModelId id);
ModelId model_id_from_name(const std::string& name);
std::string feature_id_name(FeatureId id);
FeatureId feature_id_from_name(const std::string& name);

// Flat key=value experiment configuration; every key can be overridden by
// a CLI flag of the same name.
struct ExperimentConfig {
  ModelId model = ModelId::inc_tssd;
  FeatureId feature = FeatureId::rw;
  nn::TrainConfig train;
  bool augment = false;
  double clip_seconds = 6.0;
  int num_classes = 6;
  int sample_rate = 16000;
  int threads = 0;  // 0 = hardware concurrency
  // Stop once validation accuracy reaches this value (0 disables).
  double stop_val_accuracy = 0.0;

  // inc-tssd
  int inc_branch_channels = 16;
  int inc_blocks = 4;
  // res-tssd
  std::vector<int> res_stage_channels = {16, 32, 64, 128};
  int res_blocks_per_stage = 1;
  int penultimate_width = 32;

  // classical
  double svm_lambda = 1e-4;
  int svm_epochs = 50;
  int gmm_components = 3;

  // dsp
  int mfcc_coeffs = 20;
  int mel_bands = 64;

  void validate() const;
  std::map<std::string, std::string> to_map() const;
  static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
};

std::map<std::string, std::string> read_config_file(const std::string& path);
void write_config_file(const std::string& path,
                       const std::map<std::string, std::string>& kv);

}  // namespace synthattr::pipeline
