#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "synthattr/classical/svm.hpp"  // Standardizer
#include "synthattr/common/matrix.hpp"

namespace synthattr::classical {

struct GmmTrainOptions {
  int components = 3;  // K per class
  int max_iterations = 200;
  double tolerance = 1e-6;  // log-likelihood gain per sample
  double variance_floor = 1e-6;
  std::uint64_t seed = 0;
};

// Diagonal-covariance Gaussian mixture for one class.
struct GmmClassModel {
  std::vector<double> weights;  // K, sums to 1
  Matrix means;                 // K x dim
  Matrix variances;             // K x dim, floored
  // Average log-likelihood per sample after each EM iteration.
  std::vector<double> loglik_trace;
};

// Generative classifier: one mixture per class plus log class priors.
struct GmmModel {
  int class_count = 0;
  std::size_t dim = 0;
  int components = 0;
  std::vector<GmmClassModel> classes;
  std::vector<double> log_priors;
  Standardizer standardizer;
  std::string feature_config;  // key=value, mirrors SvmModel
};

// Per class, fits a K-component mixture by EM: k-means++ style seeded init,
// closed-form M-steps, variance floor, stop at max_iterations or when the
// per-sample log-likelihood gain drops below tolerance.
GmmModel gmm_fit(const Matrix& features, const std::vector<int>& labels,
                 const GmmTrainOptions& options = {});

// argmax_c of log prior + log sum_k pi_k N(x; mu_k, sigma_k), log-sum-exp
// stabilized; ties toward the smaller class id. Returns per-class
// log posteriors (up to the shared evidence constant).
std::pair<int, std::vector<double>> gmm_predict(const GmmModel& model,
                                                const std::vector<double>& x);

// Mixture log-density of a standardized point under one class model.
double gmm_class_loglik(const GmmClassModel& cls, const double* x, std::size_t dim);

// E-step responsibilities of a standardized point; sums to 1.
std::vector<double> gmm_responsibilities(const GmmClassModel& cls, const double* x,
                                         std::size_t dim);

void save_gmm(const std::string& path, const GmmModel& model);
GmmModel load_gmm(const std::string& path);

}  // namespace synthattr::classical
