#include "synthattr/classical/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"

namespace synthattr::classical {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double logsumexp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

double component_loglik(const double* x, const double* mean, const double* var,
                        std::size_t dim) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = x[d] - mean[d];
    acc += std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * (acc + static_cast<double>(dim) * kLog2Pi);
}

// k-means++ style seeding: first center uniform, the rest proportional to
// squared distance from the nearest chosen center.
std::vector<std::size_t> kmeanspp_centers(const Matrix& x, int k, Rng& rng) {
  std::vector<std::size_t> centers;
  centers.push_back(rng.integer(x.rows));
  std::vector<double> d2(x.rows, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    const double* last = x.row(centers.back());
    double total = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      double dist = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) {
        const double diff = x.at(r, c) - last[c];
        dist += diff * diff;
      }
      d2[r] = std::min(d2[r], dist);
      total += d2[r];
    }
    if (total <= 0.0) {
      centers.push_back(rng.integer(x.rows));  // all points coincide
      continue;
    }
    double pick = rng.uniform() * total;
    std::size_t chosen = x.rows - 1;
    for (std::size_t r = 0; r < x.rows; ++r) {
      pick -= d2[r];
      if (pick <= 0.0) {
        chosen = r;
        break;
      }
    }
    centers.push_back(chosen);
  }
  return centers;
}

GmmClassModel fit_class(const Matrix& x, const GmmTrainOptions& options,
                        std::uint64_t seed) {
  const int k = options.components;
  const std::size_t n = x.rows, dim = x.cols;
  Rng rng(seed);

  GmmClassModel cls;
  cls.weights.assign(k, 1.0 / k);
  cls.means = Matrix(k, dim);
  cls.variances = Matrix(k, dim);

  const auto centers = kmeanspp_centers(x, k, rng);
  for (int j = 0; j < k; ++j)
    std::copy(x.row(centers[j]), x.row(centers[j]) + dim, cls.means.row(j));

  // Initial spread: per-dimension class variance.
  std::vector<double> col_mean(dim, 0.0), col_var(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) col_mean[c] += x.at(r, c);
  for (auto& m : col_mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      const double d = x.at(r, c) - col_mean[c];
      col_var[c] += d * d;
    }
  for (auto& v : col_var)
    v = std::max(v / static_cast<double>(n), options.variance_floor);
  for (int j = 0; j < k; ++j)
    std::copy(col_var.begin(), col_var.end(), cls.variances.row(j));

  Matrix resp(n, k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    // E-step.
    double total_ll = 0.0;
    std::vector<double> logp(k);
    for (std::size_t r = 0; r < n; ++r) {
      for (int j = 0; j < k; ++j)
        logp[j] = std::log(cls.weights[j]) +
                  component_loglik(x.row(r), cls.means.row(j), cls.variances.row(j),
                                   dim);
      const double norm = logsumexp(logp);
      total_ll += norm;
      for (int j = 0; j < k; ++j) resp.at(r, j) = std::exp(logp[j] - norm);
    }
    cls.loglik_trace.push_back(total_ll / static_cast<double>(n));

    // M-step.
    for (int j = 0; j < k; ++j) {
      double nk = 0.0;
      for (std::size_t r = 0; r < n; ++r) nk += resp.at(r, j);
      nk = std::max(nk, 1e-12);
      cls.weights[j] = nk / static_cast<double>(n);
      double* mu = cls.means.row(j);
      std::fill(mu, mu + dim, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const double w = resp.at(r, j);
        const double* xr = x.row(r);
        for (std::size_t c = 0; c < dim; ++c) mu[c] += w * xr[c];
      }
      for (std::size_t c = 0; c < dim; ++c) mu[c] /= nk;
      double* var = cls.variances.row(j);
      std::fill(var, var + dim, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const double w = resp.at(r, j);
        const double* xr = x.row(r);
        for (std::size_t c = 0; c < dim; ++c) {
          const double d = xr[c] - mu[c];
          var[c] += w * d * d;
        }
      }
      for (std::size_t c = 0; c < dim; ++c)
        var[c] = std::max(var[c] / nk, options.variance_floor);
    }

    const double gain = (cls.loglik_trace.back() - prev_ll);
    prev_ll = cls.loglik_trace.back();
    if (iter > 0 && gain < options.tolerance) break;
  }
  return cls;
}

}  // namespace

double gmm_class_loglik(const GmmClassModel& cls, const double* x, std::size_t dim) {
  std::vector<double> logp(cls.weights.size());
  for (std::size_t j = 0; j < cls.weights.size(); ++j)
    logp[j] = std::log(cls.weights[j]) +
              component_loglik(x, cls.means.row(j), cls.variances.row(j), dim);
  return logsumexp(logp);
}

std::vector<double> gmm_responsibilities(const GmmClassModel& cls, const double* x,
                                         std::size_t dim) {
  std::vector<double> logp(cls.weights.size());
  for (std::size_t j = 0; j < cls.weights.size(); ++j)
    logp[j] = std::log(cls.weights[j]) +
              component_loglik(x, cls.means.row(j), cls.variances.row(j), dim);
  const double norm = logsumexp(logp);
  std::vector<double> resp(logp.size());
  for (std::size_t j = 0; j < logp.size(); ++j) resp[j] = std::exp(logp[j] - norm);
  return resp;
}

GmmModel gmm_fit(const Matrix& features, const std::vector<int>& labels,
                 const GmmTrainOptions& options) {
  if (labels.size() != features.rows)
    throw DimensionMismatch("gmm_fit: label count mismatch");
  std::set<int> class_set(labels.begin(), labels.end());
  if (class_set.empty()) throw TooFewSamples("gmm_fit: empty training set");
  const int class_count = *class_set.rbegin() + 1;

  GmmModel model;
  model.class_count = class_count;
  model.dim = features.cols;
  model.components = options.components;
  model.standardizer = Standardizer::fit(features);
  const Matrix x = model.standardizer.transform(features);

  std::vector<Matrix> per_class(class_count);
  for (int cls = 0; cls < class_count; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < x.rows; ++r)
      if (labels[r] == cls) rows.push_back(r);
    if (rows.size() < static_cast<std::size_t>(options.components))
      throw TooFewSamples("class " + std::to_string(cls) + " has " +
                          std::to_string(rows.size()) + " samples, needs >= " +
                          std::to_string(options.components));
    Matrix sub(rows.size(), x.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy(x.row(rows[i]), x.row(rows[i]) + x.cols, sub.row(i));
    per_class[cls] = std::move(sub);
  }

  model.classes.resize(class_count);
  model.log_priors.resize(class_count);
  parallel_for(0, class_count, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t cls = lo; cls < hi; ++cls) {
      model.classes[cls] =
          fit_class(per_class[cls], options,
                    derive_seed(options.seed, "gmm-class",
                                static_cast<std::uint64_t>(cls)));
      model.log_priors[cls] =
          std::log(static_cast<double>(per_class[cls].rows) /
                   static_cast<double>(x.rows));
    }
  });
  return model;
}

std::pair<int, std::vector<double>> gmm_predict(const GmmModel& model,
                                                const std::vector<double>& x) {
  if (x.size() != model.dim) throw DimensionMismatch("gmm_predict: dimension");
  const auto z = model.standardizer.transform(x.data(), x.size());
  std::vector<double> post(model.class_count);
  for (int cls = 0; cls < model.class_count; ++cls)
    post[cls] = model.log_priors[cls] +
                gmm_class_loglik(model.classes[cls], z.data(), model.dim);
  int best = 0;
  for (int cls = 1; cls < model.class_count; ++cls)
    if (post[cls] > post[best]) best = cls;
  return {best, post};
}

namespace {
constexpr char kGmmMagic[8] = {'S', 'A', 'T', 'G', 'M', 'M', '0', '1'};

void write_matrix(std::ofstream& os, const Matrix& m) {
  const std::uint64_t r = m.rows, c = m.cols;
  os.write(reinterpret_cast<const char*>(&r), 8);
  os.write(reinterpret_cast<const char*>(&c), 8);
  os.write(reinterpret_cast<const char*>(m.values.data()),
           static_cast<std::streamsize>(m.values.size() * sizeof(double)));
}

Matrix read_matrix(std::ifstream& is) {
  std::uint64_t r = 0, c = 0;
  is.read(reinterpret_cast<char*>(&r), 8);
  is.read(reinterpret_cast<char*>(&c), 8);
  Matrix m(r, c);
  is.read(reinterpret_cast<char*>(m.values.data()),
          static_cast<std::streamsize>(m.values.size() * sizeof(double)));
  return m;
}

void write_vec(std::ofstream& os, const std::vector<double>& v) {
  const std::uint64_t n = v.size();
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::ifstream& is) {
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), 8);
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  return v;
}
}  // namespace

void save_gmm(const std::string& path, const GmmModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os.write(kGmmMagic, 8);
  const std::uint32_t classes = model.class_count, k = model.components;
  const std::uint64_t dim = model.dim;
  os.write(reinterpret_cast<const char*>(&classes), 4);
  os.write(reinterpret_cast<const char*>(&k), 4);
  os.write(reinterpret_cast<const char*>(&dim), 8);
  for (const auto& cls : model.classes) {
    write_vec(os, cls.weights);
    write_matrix(os, cls.means);
    write_matrix(os, cls.variances);
  }
  write_vec(os, model.log_priors);
  write_vec(os, model.standardizer.mean);
  write_vec(os, model.standardizer.inv_std);
  const std::uint64_t fc_len = model.feature_config.size();
  os.write(reinterpret_cast<const char*>(&fc_len), 8);
  os.write(model.feature_config.data(), static_cast<std::streamsize>(fc_len));
  if (!os) throw IoFailure("short write to " + path);
}

GmmModel load_gmm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kGmmMagic, 8) != 0)
    throw DataError(path + ": not a gmm model file");
  GmmModel model;
  std::uint32_t classes = 0, k = 0;
  std::uint64_t dim = 0;
  is.read(reinterpret_cast<char*>(&classes), 4);
  is.read(reinterpret_cast<char*>(&k), 4);
  is.read(reinterpret_cast<char*>(&dim), 8);
  model.class_count = static_cast<int>(classes);
  model.components = static_cast<int>(k);
  model.dim = dim;
  model.classes.resize(classes);
  for (auto& cls : model.classes) {
    cls.weights = read_vec(is);
    cls.means = read_matrix(is);
    cls.variances = read_matrix(is);
  }
  model.log_priors = read_vec(is);
  model.standardizer.mean = read_vec(is);
  model.standardizer.inv_std = read_vec(is);
  std::uint64_t fc_len = 0;
  is.read(reinterpret_cast<char*>(&fc_len), 8);
  model.feature_config.resize(fc_len);
  is.read(model.feature_config.data(), static_cast<std::streamsize>(fc_len));
  if (!is) throw DataError(path + ": truncated gmm model");
  return model;
}

}  // namespace synthattr::classical
