#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synthattr/common/matrix.hpp"

namespace synthattr::classical {

// Per-dimension zero-mean unit-variance scaling. Statistics are fit on the
// training split only and reused verbatim elsewhere (no leakage).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;  // 1 for zero-variance dimensions

  static Standardizer fit(const Matrix& data);
  std::vector<double> transform(const double* x, std::size_t n) const;
  Matrix transform(const Matrix& data) const;
};

struct SvmTrainOptions {
  double lambda = 1e-4;
  int epochs = 50;
  std::uint64_t seed = 0;
};

// One-vs-rest linear SVM bank: per class a binary hinge-loss + L2
// classifier trained by seeded stochastic subgradient descent on the
// objective lambda*||w||^2 + mean hinge.
struct SvmModel {
  int class_count = 0;
  std::size_t dim = 0;
  double lambda = 0.0;
  std::vector<std::vector<double>> weights;  // class_count x dim
  std::vector<double> intercepts;
  Standardizer standardizer;
  // Feature-extraction settings (key=value) so evaluation can recompute
  // matching inputs.
  std::string feature_config;
  bool degenerate_data = false;  // all feature vectors identical
  // Full-set objective (summed over the per-class classifiers) after each
  // epoch, for the non-increase property.
  std::vector<double> epoch_objectives;
};

SvmModel svm_train(const Matrix& features, const std::vector<int>& labels,
                   const SvmTrainOptions& options = {});

// argmax_c of w_c . x + b_c; ties toward the smaller class id. Returns the
// raw per-class scores alongside the decision.
std::pair<int, std::vector<double>> svm_predict(const SvmModel& model,
                                                const std::vector<double>& x);

void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(const std::string& path);

// Inspectable weight export: one row per class, intercept last.
void export_svm_weights_csv(const std::string& path, const SvmModel& model);

}  // namespace synthattr::classical
