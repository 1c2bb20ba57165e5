#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthattr/analysis/analysis.hpp"

namespace synthattr::analysis {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Small dimensions
// only (d <= a few hundred), which covers every feature space here.
void jacobi_eigen(Matrix a, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
  const std::size_t n = a.rows;
  eigenvectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = eigenvectors.at(i, p), viq = eigenvectors.at(i, q);
          eigenvectors.at(i, p) = c * vip - s * viq;
          eigenvectors.at(i, q) = s * vip + c * viq;
        }
      }
  }
  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a.at(i, i);
}

}  // namespace

PcaResult pca_fit_transform(const Matrix& data, std::size_t out_dims) {
  const std::size_t n = data.rows, d = data.cols;
  if (n < 2) throw DataError("pca needs at least 2 rows");
  if (out_dims > std::min(n, d))
    throw ConfigInvalid("pca: out_dims exceeds min(N, d)");

  PcaResult res;
  res.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) res.mean[c] += data.at(r, c);
  for (auto& m : res.mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      centered.at(r, c) = data.at(r, c) - res.mean[c];

  Matrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        acc += centered.at(r, i) * centered.at(r, j);
      cov.at(i, j) = cov.at(j, i) = acc / static_cast<double>(n - 1);
    }

  std::vector<double> eig;
  Matrix vecs;
  jacobi_eigen(cov, eig, vecs);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&eig](std::size_t a, std::size_t b) { return eig[a] > eig[b]; });

  double total = 0.0;
  for (double e : eig) total += std::max(e, 0.0);

  std::size_t available = 0;
  for (std::size_t i = 0; i < out_dims; ++i)
    if (eig[order[i]] > 0.0) ++available;
  res.rank_warning = available < out_dims;
  const std::size_t k = res.rank_warning ? available : out_dims;

  res.components = Matrix(k, d);
  res.explained_ratio.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t src = order[i];
    // Deterministic sign: largest-magnitude loading positive.
    std::size_t arg = 0;
    for (std::size_t c = 1; c < d; ++c)
      if (std::abs(vecs.at(c, src)) > std::abs(vecs.at(arg, src))) arg = c;
    const double sign = vecs.at(arg, src) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t c = 0; c < d; ++c)
      res.components.at(i, c) = sign * vecs.at(c, src);
    res.explained_ratio[i] = total > 0.0 ? eig[src] / total : 0.0;
  }

  res.transformed = Matrix(n, k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c)
        acc += centered.at(r, c) * res.components.at(i, c);
      res.transformed.at(r, i) = acc;
    }
  return res;
}

Matrix PcaResult::inverse(const Matrix& scores) const {
  const std::size_t d = mean.size(), k = components.rows;
  if (scores.cols != k) throw DimensionMismatch("pca inverse: score width");
  Matrix out(scores.rows, d);
  for (std::size_t r = 0; r < scores.rows; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      double acc = mean[c];
      for (std::size_t i = 0; i < k; ++i)
        acc += scores.at(r, i) * components.at(i, c);
      out.at(r, c) = acc;
    }
  return out;
}

}  // namespace synthattr::analysis
