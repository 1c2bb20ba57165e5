#include <algorithm>
#include <cmath>
#include <limits>

#include "synthattr/analysis/analysis.hpp"
#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"

namespace synthattr::analysis {

namespace {

Matrix squared_distances(const Matrix& x) {
  const std::size_t n = x.rows;
  Matrix d2(n, n);
  parallel_for(0, static_cast<std::int64_t>(n), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < x.cols; ++c) {
          const double diff = x.at(i, c) - x.at(j, c);
          acc += diff * diff;
        }
        d2.at(i, j) = acc;
      }
  });
  return d2;
}

}  // namespace

RowCalibration calibrate_affinity_row(const std::vector<double>& d2_row,
                                      std::size_t self, double perplexity) {
  const std::size_t n = d2_row.size();
  RowCalibration cal;
  cal.p.assign(n, 0.0);
  const double target = std::log2(perplexity);

  double beta = 1.0, beta_lo = 0.0,
         beta_hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50; ++iter) {
    // P_{j|i} and its entropy at the current precision.
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      cal.p[j] = j == self ? 0.0 : std::exp(-beta * d2_row[j]);
      sum += cal.p[j];
    }
    double entropy = 0.0;  // bits
    for (std::size_t j = 0; j < n; ++j) {
      if (cal.p[j] <= 0.0) continue;
      const double pj = cal.p[j] / sum;
      entropy -= pj * std::log2(pj);
    }
    cal.entropy_bits = entropy;
    cal.beta = beta;
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-5) break;
    if (diff > 0.0) {  // too flat: sharpen
      beta_lo = beta;
      beta = std::isinf(beta_hi) ? beta * 2.0 : (beta + beta_hi) / 2.0;
    } else {
      beta_hi = beta;
      beta = (beta + beta_lo) / 2.0;
    }
  }
  double sum = 0.0;
  for (double v : cal.p) sum += v;
  if (sum > 0.0)
    for (auto& v : cal.p) v /= sum;
  return cal;
}

TsneResult tsne_embed(const Matrix& data, const TsneOptions& options) {
  const std::size_t n = data.rows;
  if (3.0 * options.perplexity >= static_cast<double>(n))
    throw PerplexityTooLarge("need 3*perplexity < N");

  // PCA pre-reduction to min(d, 50), mirroring the PCA-then-t-SNE order.
  const Matrix* input = &data;
  Matrix reduced;
  if (data.cols > 50) {
    reduced = pca_fit_transform(data, 50).transformed;
    input = &reduced;
  }

  const Matrix d2 = squared_distances(*input);

  // Symmetrized affinities.
  Matrix p(n, n);
  parallel_for(0, static_cast<std::int64_t>(n), [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      std::vector<double> row(d2.row(i), d2.row(i) + n);
      const auto cal = calibrate_affinity_row(row, static_cast<std::size_t>(i),
                                              options.perplexity);
      for (std::size_t j = 0; j < n; ++j) p.at(i, j) = cal.p[j];
    }
  });
  Matrix pij(n, n);
  double psum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      pij.at(i, j) = p.at(i, j) + p.at(j, i);
      psum += pij.at(i, j);
    }
  for (auto& v : pij.values) v = std::max(v / psum, 1e-12);

  // Seeded Gaussian init scaled 1e-4.
  Rng rng(options.seed);
  Matrix y(n, 2);
  for (auto& v : y.values) v = rng.gaussian() * 1e-4;

  Matrix velocity(n, 2), gains(n, 2);
  std::fill(gains.values.begin(), gains.values.end(), 1.0);

  Matrix q(n, n);
  // KL(P || Q) of the current embedding, recomputed from scratch.
  auto kl_divergence = [&]() {
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dx = y.at(i, 0) - y.at(j, 0);
        const double dy = y.at(i, 1) - y.at(j, 1);
        qsum += 1.0 / (1.0 + dx * dx + dy * dy);
      }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double dx = y.at(i, 0) - y.at(j, 0);
        const double dy = y.at(i, 1) - y.at(j, 1);
        const double qv = std::max(1.0 / ((1.0 + dx * dx + dy * dy) * qsum), 1e-12);
        kl += pij.at(i, j) * std::log(pij.at(i, j) / qv);
      }
    return kl;
  };

  TsneResult res;
  Matrix grad(n, 2);
  for (int iter = 0; iter < options.iterations; ++iter) {
    const bool exaggerating = iter < options.early_exaggeration_iters;
    const double ex = exaggerating ? options.early_exaggeration : 1.0;
    const double momentum = iter < 250 ? 0.5 : 0.8;

    // Student-t affinities in the embedding.
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) {
          q.at(i, j) = 0.0;
          continue;
        }
        const double dx = y.at(i, 0) - y.at(j, 0);
        const double dy = y.at(i, 1) - y.at(j, 1);
        q.at(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        qsum += q.at(i, j);
      }

    std::fill(grad.values.begin(), grad.values.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double num = q.at(i, j);  // unnormalized student-t
        const double mult = (ex * pij.at(i, j) - num / qsum) * num;
        grad.at(i, 0) += 4.0 * mult * (y.at(i, 0) - y.at(j, 0));
        grad.at(i, 1) += 4.0 * mult * (y.at(i, 1) - y.at(j, 1));
      }

    for (std::size_t i = 0; i < n * 2; ++i) {
      const bool same_sign = (grad.values[i] > 0.0) == (velocity.values[i] > 0.0);
      gains.values[i] = std::max(0.01, same_sign ? gains.values[i] * 0.8
                                                 : gains.values[i] + 0.2);
      velocity.values[i] = momentum * velocity.values[i] -
                           options.learning_rate * gains.values[i] * grad.values[i];
      y.values[i] += velocity.values[i];
    }

    if (iter == 0) res.kl_first = kl_divergence();
    if (iter + 1 == options.iterations) res.kl_final = kl_divergence();
  }
  res.embedding = std::move(y);
  return res;
}

}  // namespace synthattr::analysis
