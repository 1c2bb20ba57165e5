#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synthattr/common/matrix.hpp"
#include "synthattr/pipeline/pipeline.hpp"

namespace synthattr::pipeline {

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
  std::string checkpoint_path;       // best-val weights (or classical model)
  std::string last_checkpoint_path;  // empty for classical models
};

// Raw waveforms of one split, fixed-length, in manifest order.
struct WaveDataset {
  std::vector<std::vector<float>> waves;
  std::vector<int> labels;
  std::int64_t length = 0;  // samples per clip
};

WaveDataset load_waveforms(const DatasetManifest& manifest, Split split,
                           double clip_seconds, int sample_rate);

// Pooled (mean+std) MFCC or mel-spectrogram vectors of one split.
std::pair<Matrix, std::vector<int>> load_pooled_features(
    const DatasetManifest& manifest, Split split, const ExperimentConfig& cfg);

// Runs the epoch loop (or the classical fit) and writes the run directory:
// config.snapshot, log.csv, checkpoint.bin (best val), checkpoint.last.bin.
TrainResult train_model(const ExperimentConfig& cfg, const DatasetManifest& manifest,
                        const std::string& out_dir);

// Deterministic eval-mode predictions over a split. When out_dir is
// non-empty, emits confusion.csv and confusion.svg there.
std::pair<double, ConfusionMatrix> evaluate_model(const std::string& model_path,
                                                  const DatasetManifest& manifest,
                                                  Split split,
                                                  const std::string& out_dir = "");

// One prediction row per eval-split file, manifest order; missing files are
// reported, marked failed in the CSV, and the run continues.
void predict_unlabeled(const std::string& model_path,
                       const DatasetManifest& manifest,
                       const std::string& out_csv);

// Penultimate-layer embeddings (NN checkpoints) or pooled feature vectors
// (classical models) for a split, plus labels.
std::pair<Matrix, std::vector<int>> embeddings_for_split(
    const std::string& model_path, const DatasetManifest& manifest, Split split);

}  // namespace synthattr::pipeline
