#include "synthattr/classical/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"

namespace synthattr::classical {

Standardizer Standardizer::fit(const Matrix& data) {
  Standardizer s;
  s.mean.assign(data.cols, 0.0);
  s.inv_std.assign(data.cols, 1.0);
  if (data.rows == 0) return s;
  for (std::size_t r = 0; r < data.rows; ++r)
    for (std::size_t c = 0; c < data.cols; ++c) s.mean[c] += data.at(r, c);
  for (auto& m : s.mean) m /= static_cast<double>(data.rows);
  for (std::size_t c = 0; c < data.cols; ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
      const double d = data.at(r, c) - s.mean[c];
      var += d * d;
    }
    var /= static_cast<double>(data.rows);
    s.inv_std[c] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::transform(const double* x, std::size_t n) const {
  if (n != mean.size()) throw DimensionMismatch("standardizer dimension mismatch");
  std::vector<double> out(n);
  for (std::size_t c = 0; c < n; ++c) out[c] = (x[c] - mean[c]) * inv_std[c];
  return out;
}

Matrix Standardizer::transform(const Matrix& data) const {
  Matrix out(data.rows, data.cols);
  for (std::size_t r = 0; r < data.rows; ++r) {
    const auto row = transform(data.row(r), data.cols);
    std::copy(row.begin(), row.end(), out.row(r));
  }
  return out;
}

namespace {

double binary_objective(const Matrix& x, const std::vector<int>& sign,
                        const std::vector<double>& w, double b, double lambda) {
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  double hinge = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    double score = b;
    const double* row = x.row(r);
    for (std::size_t c = 0; c < x.cols; ++c) score += w[c] * row[c];
    hinge += std::max(0.0, 1.0 - sign[r] * score);
  }
  return lambda * norm2 + hinge / static_cast<double>(x.rows);
}

}  // namespace

SvmModel svm_train(const Matrix& features, const std::vector<int>& labels,
                   const SvmTrainOptions& options) {
  if (features.rows < 2) throw TooFewSamples("svm_train needs at least 2 samples");
  if (labels.size() != features.rows)
    throw DimensionMismatch("svm_train: label count mismatch");
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2)
    throw SingleClassData("svm_train needs at least 2 classes");
  const int class_count = *classes.rbegin() + 1;

  SvmModel model;
  model.class_count = class_count;
  model.dim = features.cols;
  model.lambda = options.lambda;
  model.standardizer = Standardizer::fit(features);
  const Matrix x = model.standardizer.transform(features);

  // Degenerate data: every feature vector identical (all margins tie).
  model.degenerate_data = true;
  for (std::size_t r = 1; r < x.rows && model.degenerate_data; ++r)
    for (std::size_t c = 0; c < x.cols; ++c)
      if (x.at(r, c) != x.at(0, c)) {
        model.degenerate_data = false;
        break;
      }

  model.weights.assign(class_count, std::vector<double>(features.cols, 0.0));
  model.intercepts.assign(class_count, 0.0);
  Matrix per_epoch(class_count, static_cast<std::size_t>(options.epochs));

  // One binary classifier per class; classes are independent, so training
  // them in parallel is still deterministic.
  parallel_for(0, class_count, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t cls = lo; cls < hi; ++cls) {
      std::vector<int> sign(x.rows);
      for (std::size_t r = 0; r < x.rows; ++r)
        sign[r] = labels[r] == cls ? 1 : -1;
      auto& w = model.weights[cls];
      double& b = model.intercepts[cls];
      Rng rng(derive_seed(options.seed, "svm-class", static_cast<std::uint64_t>(cls)));
      std::vector<std::size_t> order(x.rows);
      std::iota(order.begin(), order.end(), 0);
      std::size_t t = 0;
      for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t i = x.rows; i > 1; --i)
          std::swap(order[i - 1], order[rng.integer(i)]);
        for (const std::size_t r : order) {
          ++t;
          const double lr = 0.1 / (1.0 + static_cast<double>(t) * options.lambda);
          const double* row = x.row(r);
          double score = b;
          for (std::size_t c = 0; c < x.cols; ++c) score += w[c] * row[c];
          const double shrink = 1.0 - 2.0 * lr * options.lambda;
          for (auto& v : w) v *= shrink;
          if (sign[r] * score < 1.0) {
            for (std::size_t c = 0; c < x.cols; ++c) w[c] += lr * sign[r] * row[c];
            b += lr * sign[r];
          }
        }
        per_epoch.at(static_cast<std::size_t>(cls), static_cast<std::size_t>(epoch)) =
            binary_objective(x, sign, w, b, options.lambda);
      }
    }
  });

  model.epoch_objectives.assign(static_cast<std::size_t>(options.epochs), 0.0);
  for (int epoch = 0; epoch < options.epochs; ++epoch)
    for (int cls = 0; cls < class_count; ++cls)
      model.epoch_objectives[epoch] += per_epoch.at(cls, epoch);
  return model;
}

std::pair<int, std::vector<double>> svm_predict(const SvmModel& model,
                                                const std::vector<double>& x) {
  if (x.size() != model.dim) throw DimensionMismatch("svm_predict: dimension");
  const auto z = model.standardizer.transform(x.data(), x.size());
  std::vector<double> scores(model.class_count, 0.0);
  for (int cls = 0; cls < model.class_count; ++cls) {
    double s = model.intercepts[cls];
    const auto& w = model.weights[cls];
    for (std::size_t c = 0; c < z.size(); ++c) s += w[c] * z[c];
    scores[cls] = s;
  }
  int best = 0;
  for (int cls = 1; cls < model.class_count; ++cls)
    if (scores[cls] > scores[best]) best = cls;
  return {best, scores};
}

namespace {
constexpr char kSvmMagic[8] = {'S', 'A', 'T', 'S', 'V', 'M', '0', '1'};

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

void save_svm(const std::string& path, const SvmModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os.write(kSvmMagic, 8);
  const std::uint32_t classes = model.class_count;
  const std::uint64_t dim = model.dim;
  os.write(reinterpret_cast<const char*>(&classes), 4);
  os.write(reinterpret_cast<const char*>(&dim), 8);
  os.write(reinterpret_cast<const char*>(&model.lambda), 8);
  for (const auto& w : model.weights) write_vec(os, w);
  write_vec(os, model.intercepts);
  write_vec(os, model.standardizer.mean);
  write_vec(os, model.standardizer.inv_std);
  const std::uint64_t fc_len = model.feature_config.size();
  os.write(reinterpret_cast<const char*>(&fc_len), 8);
  os.write(model.feature_config.data(), static_cast<std::streamsize>(fc_len));
  if (!os) throw IoFailure("short write to " + path);
}

SvmModel load_svm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSvmMagic, 8) != 0)
    throw DataError(path + ": not an svm model file");
  SvmModel model;
  std::uint32_t classes = 0;
  std::uint64_t dim = 0;
  is.read(reinterpret_cast<char*>(&classes), 4);
  is.read(reinterpret_cast<char*>(&dim), 8);
  is.read(reinterpret_cast<char*>(&model.lambda), 8);
  model.class_count = static_cast<int>(classes);
  model.dim = dim;
  model.weights.resize(classes);
  for (auto& w : model.weights) w = read_vec(is);
  model.intercepts = read_vec(is);
  model.standardizer.mean = read_vec(is);
  model.standardizer.inv_std = read_vec(is);
  std::uint64_t fc_len = 0;
  is.read(reinterpret_cast<char*>(&fc_len), 8);
  model.feature_config.resize(fc_len);
  is.read(model.feature_config.data(), static_cast<std::streamsize>(fc_len));
  if (!is) throw DataError(path + ": truncated svm model");
  return model;
}

void export_svm_weights_csv(const std::string& path, const SvmModel& model) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "class";
  for (std::size_t c = 0; c < model.dim; ++c) os << ",w" << c;
  os << ",intercept\n";
  os.precision(17);
  for (int cls = 0; cls < model.class_count; ++cls) {
    os << cls;
    for (double v : model.weights[cls]) os << ',' << v;
    os << ',' << model.intercepts[cls] << '\n';
  }
}

}  // namespace synthattr::classical
