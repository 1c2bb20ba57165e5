#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthattr/common/matrix.hpp"

namespace synthattr::analysis {

struct PcaResult {
  Matrix transformed;                    // N x k
  std::vector<double> explained_ratio;   // k, of total variance
  Matrix components;                     // k x d, rows orthonormal
  std::vector<double> mean;              // d
  bool rank_warning = false;  // fewer positive eigenvalues than requested

  // Maps k-dim scores back to the original space (adds the mean back).
  Matrix inverse(const Matrix& scores) const;
};

// Mean-centering + covariance eigendecomposition, projection onto the top-k
// components by descending eigenvalue. Sign convention: the
// largest-magnitude loading of each component is positive. If fewer than k
// eigenvalues are positive, the available components are returned and
// rank_warning is set.
PcaResult pca_fit_transform(const Matrix& data, std::size_t out_dims);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  int early_exaggeration_iters = 250;
  double early_exaggeration = 12.0;
  double learning_rate = 200.0;
};

struct TsneResult {
  Matrix embedding;  // N x 2
  double kl_first = 0.0;  // KL divergence after iteration 1
  double kl_final = 0.0;
};

// Exact O(N^2) t-SNE with PCA pre-reduction to min(d, 50), per-point sigma
// calibrated to the perplexity by bisection, early exaggeration, and
// momentum gradient descent. Deterministic given (inputs, seed).
TsneResult tsne_embed(const Matrix& data, const TsneOptions& options = {});

// Conditional-affinity row for one point: bisection on the precision so
// that the Shannon entropy (bits) matches log2(perplexity) within 1e-5
// (at most 50 bisections). d2_row holds squared distances with the
// self-distance at position `self`.
struct RowCalibration {
  std::vector<double> p;  // conditional p_{j|i}, p[self] = 0
  double entropy_bits = 0.0;
  double beta = 1.0;  // 1 / (2 sigma^2)
};
RowCalibration calibrate_affinity_row(const std::vector<double>& d2_row,
                                      std::size_t self, double perplexity);

struct SeparationReport {
  double silhouette = 0.0;
  Matrix centroid_distances;            // C x C
  std::vector<double> intra_dispersion;  // per class mean distance to centroid
  double mean_intra_dispersion = 0.0;
};

// Euclidean silhouette score over all points; throws SingleClass when
// fewer than two labels are present.
double silhouette_score(const Matrix& points, const std::vector<int>& labels);

SeparationReport separation_report(const Matrix& points,
                                   const std::vector<int>& labels);

// Embedding dump: CSV with header x,y,label,source.
void write_embedding_csv(const std::string& path, const Matrix& points2d,
                         const std::vector<int>& labels, const std::string& source);

// Self-contained SVG scatter, one color per class, with legend and title.
void write_scatter_svg(const std::string& path, const Matrix& points2d,
                       const std::vector<int>& labels, const std::string& title);

}  // namespace synthattr::analysis
