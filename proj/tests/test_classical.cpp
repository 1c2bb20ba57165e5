#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "synthattr/classical/gmm.hpp"
#include "synthattr/classical/svm.hpp"
#include "synthattr/common/rng.hpp"
#include "testkit/oracles.hpp"

using namespace synthattr;

namespace {

// Two well-separated 2-D clusters at (+5, 0) and (-5, 0).
std::pair<Matrix, std::vector<int>> two_clusters(std::size_t per_class,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(2 * per_class, 2);
  std::vector<int> y(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    x.at(i, 0) = (cls == 0 ? 5.0 : -5.0) + rng.gaussian() * 0.5;
    x.at(i, 1) = rng.gaussian() * 0.5;
    y[i] = cls;
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST_CASE("standardizer: train stats, zero-variance guard") {
  Matrix x(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    x.at(r, 0) = static_cast<double>(r);
    x.at(r, 1) = 7.0;  // constant dimension
  }
  const auto s = classical::Standardizer::fit(x);
  CHECK(s.mean[0] == doctest::Approx(1.5));
  CHECK(s.mean[1] == doctest::Approx(7.0));
  CHECK(s.inv_std[1] == 1.0);
  const auto z = s.transform(x);
  double mean0 = 0.0;
  for (std::size_t r = 0; r < 4; ++r) mean0 += z.at(r, 0);
  CHECK(std::abs(mean0) < 1e-12);
  for (std::size_t r = 0; r < 4; ++r) CHECK(z.at(r, 1) == 0.0);
}

TEST_CASE("svm_train separates two clusters with training accuracy 1.0") {
  const auto [x, y] = two_clusters(50, 3);
  const auto model = classical::svm_train(x, y, {});
  std::size_t correct = 0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    std::vector<double> row(x.row(r), x.row(r) + x.cols);
    correct += classical::svm_predict(model, row).first == y[r];
  }
  CHECK(correct == x.rows);
  CHECK_FALSE(model.degenerate_data);
}

TEST_CASE("svm_train flags all-identical feature vectors as degenerate") {
  Matrix x(6, 3);
  for (auto& v : x.values) v = 2.5;
  const std::vector<int> y = {0, 1, 0, 1, 0, 1};
  const auto model = classical::svm_train(x, y, {});
  CHECK(model.degenerate_data);
}

TEST_CASE("svm objective is invariant to duplicating every training point") {
  const auto [x, y] = two_clusters(30, 7);
  Matrix x2(x.rows * 2, x.cols);
  std::vector<int> y2(y.size() * 2);
  for (std::size_t r = 0; r < x.rows; ++r) {
    std::copy(x.row(r), x.row(r) + x.cols, x2.row(r));
    std::copy(x.row(r), x.row(r) + x.cols, x2.row(x.rows + r));
    y2[r] = y2[x.rows + r] = y[r];
  }
  classical::SvmTrainOptions options;
  options.epochs = 120;
  options.seed = 5;
  const auto m1 = classical::svm_train(x, y, options);
  const auto m2 = classical::svm_train(x2, y2, options);
  // The objective uses means, so the optimum is unchanged; the decision
  // function of both trained models agrees to tolerance on the data.
  for (std::size_t r = 0; r < x.rows; ++r) {
    std::vector<double> row(x.row(r), x.row(r) + x.cols);
    const auto s1 = classical::svm_predict(m1, row).second;
    const auto s2 = classical::svm_predict(m2, row).second;
    const double margin1 = s1[0] - s1[1];
    const double margin2 = s2[0] - s2[1];
    CHECK(std::abs(margin1 - margin2) <
          1e-6 + 0.05 * std::max(std::abs(margin1), std::abs(margin2)));
    CHECK((margin1 > 0) == (margin2 > 0));
  }
}

TEST_CASE("svm objective is non-increasing over epochs (1e-3 slack)") {
  const auto [x, y] = two_clusters(40, 11);
  classical::SvmTrainOptions options;
  options.epochs = 40;
  const auto model = classical::svm_train(x, y, options);
  REQUIRE(model.epoch_objectives.size() == 40);
  for (std::size_t e = 1; e < model.epoch_objectives.size(); ++e)
    CHECK(model.epoch_objectives[e] <= model.epoch_objectives[e - 1] + 1e-3);
}

TEST_CASE("svm_predict: tie-break toward smaller id, scaling invariance") {
  classical::SvmModel model;
  model.class_count = 3;
  model.dim = 2;
  model.weights = {{1.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}};
  model.intercepts = {0.0, 0.0, 0.0};
  model.standardizer.mean = {0.0, 0.0};
  model.standardizer.inv_std = {1.0, 1.0};
  const auto [cls, scores] = classical::svm_predict(model, {2.0, 1.0});
  CHECK(cls == 0);  // classes 0 and 1 tie exactly
  CHECK(scores[0] == scores[1]);

  const auto a = classical::svm_predict(model, {1.0, 3.0}).first;
  const auto b = classical::svm_predict(model, {4.0, 12.0}).first;
  CHECK(a == b);  // positive scaling with zero intercepts
}

TEST_CASE("svm errors: single class, dimension mismatch") {
  Matrix x(4, 2);
  CHECK_THROWS_AS(classical::svm_train(x, {1, 1, 1, 1}, {}), SingleClassData);
  const auto [xx, yy] = two_clusters(10, 1);
  const auto model = classical::svm_train(xx, yy, {});
  CHECK_THROWS_AS(classical::svm_predict(model, {1.0, 2.0, 3.0}),
                  DimensionMismatch);
}

TEST_CASE("svm model file round-trips, weights export as CSV") {
  const auto [x, y] = two_clusters(20, 13);
  auto model = classical::svm_train(x, y, {});
  model.feature_config = "feature=mfcc";
  const auto dir = std::filesystem::temp_directory_path() / "synthattr-test-svm";
  std::filesystem::create_directories(dir);
  classical::save_svm((dir / "m.bin").string(), model);
  const auto loaded = classical::load_svm((dir / "m.bin").string());
  CHECK(loaded.weights == model.weights);
  CHECK(loaded.intercepts == model.intercepts);
  CHECK(loaded.feature_config == "feature=mfcc");
  classical::export_svm_weights_csv((dir / "w.csv").string(), model);
  CHECK(std::filesystem::file_size(dir / "w.csv") > 0);
}

TEST_CASE("gmm K=1 recovers the closed-form mean and variance") {
  Rng rng(17);
  Matrix x(200, 2);
  std::vector<int> y(200, 0);
  for (std::size_t r = 0; r < 200; ++r) {
    x.at(r, 0) = 3.0 + rng.gaussian() * 2.0;
    x.at(r, 1) = -1.0 + rng.gaussian() * 0.5;
    y[r] = static_cast<int>(r % 2);  // two identical-distribution classes
  }
  classical::GmmTrainOptions options;
  options.components = 1;
  const auto model = classical::gmm_fit(x, y, options);

  // Closed form in the standardized space the model lives in.
  const auto z = model.standardizer.transform(x);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<double> mean(2, 0.0), var(2, 0.0);
    std::size_t count = 0;
    for (std::size_t r = 0; r < z.rows; ++r) {
      if (y[r] != cls) continue;
      ++count;
      for (std::size_t c = 0; c < 2; ++c) mean[c] += z.at(r, c);
    }
    for (auto& m : mean) m /= static_cast<double>(count);
    for (std::size_t r = 0; r < z.rows; ++r) {
      if (y[r] != cls) continue;
      for (std::size_t c = 0; c < 2; ++c) {
        const double d = z.at(r, c) - mean[c];
        var[c] += d * d;
      }
    }
    for (auto& v : var) v = std::max(v / static_cast<double>(count), 1e-6);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(model.classes[cls].means.at(0, c) ==
            doctest::Approx(mean[c]).epsilon(1e-9));
      CHECK(model.classes[cls].variances.at(0, c) ==
            doctest::Approx(var[c]).epsilon(1e-9));
    }
  }
}

TEST_CASE("gmm recovers a synthetic 1-D two-component mixture") {
  const auto data =
      testkit::sample_gaussian_mixture({-5.0, 5.0}, {1.0, 1.0}, {0.5, 0.5}, 1000, 23);
  Matrix x(1000, 1);
  for (std::size_t r = 0; r < 1000; ++r) x.at(r, 0) = data[r];
  std::vector<int> y(1000, 0);
  classical::GmmTrainOptions options;
  options.components = 2;
  options.seed = 23;
  const auto model = classical::gmm_fit(x, y, options);

  // Map recovered means back to the raw space.
  const double inv = model.standardizer.inv_std[0];
  const double mu = model.standardizer.mean[0];
  std::vector<double> means = {model.classes[0].means.at(0, 0) / inv + mu,
                               model.classes[0].means.at(1, 0) / inv + mu};
  std::sort(means.begin(), means.end());
  CHECK(std::abs(means[0] - (-5.0)) < 0.2);
  CHECK(std::abs(means[1] - 5.0) < 0.2);
  for (double w : model.classes[0].weights) CHECK(std::abs(w - 0.5) < 0.05);
}

TEST_CASE("gmm log-likelihood trace is non-decreasing (1e-9 slack)") {
  const auto data = testkit::sample_gaussian_mixture({-2.0, 1.0, 4.0},
                                                     {0.7, 0.4, 1.2},
                                                     {0.3, 0.3, 0.4}, 600, 29);
  Matrix x(600, 1);
  for (std::size_t r = 0; r < 600; ++r) x.at(r, 0) = data[r];
  std::vector<int> y(600, 0);
  classical::GmmTrainOptions options;
  options.components = 3;
  options.seed = 31;
  const auto model = classical::gmm_fit(x, y, options);
  const auto& trace = model.classes[0].loglik_trace;
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] >= trace[i - 1] - 1e-9);
}

TEST_CASE("gmm responsibilities sum to 1 within 1e-12") {
  const auto [x, y] = two_clusters(50, 37);
  classical::GmmTrainOptions options;
  options.components = 2;
  const auto model = classical::gmm_fit(x, y, options);
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> probe = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    for (const auto& cls : model.classes) {
      const auto resp = classical::gmm_responsibilities(cls, probe.data(), 2);
      double sum = 0.0;
      for (double v : resp) sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("gmm_predict: dominant likelihood wins, ties break small") {
  classical::GmmModel model;
  model.class_count = 2;
  model.dim = 1;
  model.components = 1;
  model.standardizer.mean = {0.0};
  model.standardizer.inv_std = {1.0};
  model.log_priors = {std::log(0.5), std::log(0.5)};
  classical::GmmClassModel tight;
  tight.weights = {1.0};
  tight.means = Matrix(1, 1);
  tight.means.at(0, 0) = 2.0;
  tight.variances = Matrix(1, 1);
  tight.variances.at(0, 0) = 0.1;
  classical::GmmClassModel wide = tight;
  wide.means.at(0, 0) = -2.0;
  wide.variances.at(0, 0) = 4.0;
  model.classes = {tight, wide};
  CHECK(classical::gmm_predict(model, {2.0}).first == 0);

  model.classes = {tight, tight};  // identical models tie
  CHECK(classical::gmm_predict(model, {0.7}).first == 0);
}

TEST_CASE("gmm posteriors agree with direct density evaluation") {
  const auto [x, y] = two_clusters(40, 43);
  classical::GmmTrainOptions options;
  options.components = 2;
  const auto model = classical::gmm_fit(x, y, options);
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> probe = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto post = classical::gmm_predict(model, probe).second;
    const auto z = model.standardizer.transform(probe.data(), 2);
    for (int cls = 0; cls < 2; ++cls) {
      // Direct density without log-sum-exp.
      double density = 0.0;
      const auto& cm = model.classes[cls];
      for (std::size_t k = 0; k < cm.weights.size(); ++k) {
        double quad = 0.0, norm = 1.0;
        for (std::size_t d = 0; d < 2; ++d) {
          const double diff = z[d] - cm.means.at(k, d);
          quad += diff * diff / cm.variances.at(k, d);
          norm *= 2.0 * M_PI * cm.variances.at(k, d);
        }
        density += cm.weights[k] * std::exp(-0.5 * quad) / std::sqrt(norm);
      }
      const double direct = model.log_priors[cls] + std::log(density);
      CHECK(testkit::rel_error(post[cls], direct, 1e-9) < 1e-9);
    }
  }
}

TEST_CASE("gmm errors: too few samples per class, dimension mismatch") {
  Matrix x(3, 2);
  x.at(0, 0) = 1;
  x.at(1, 0) = 2;
  x.at(2, 0) = 3;
  classical::GmmTrainOptions options;
  options.components = 2;
  CHECK_THROWS_AS(classical::gmm_fit(x, {0, 0, 1}, options), TooFewSamples);

  const auto [xx, yy] = two_clusters(20, 53);
  options.components = 2;
  const auto model = classical::gmm_fit(xx, yy, options);
  CHECK_THROWS_AS(classical::gmm_predict(model, {1.0}), DimensionMismatch);
}

TEST_CASE("gmm model file round-trips") {
  const auto [x, y] = two_clusters(30, 59);
  classical::GmmTrainOptions options;
  options.components = 2;
  auto model = classical::gmm_fit(x, y, options);
  model.feature_config = "feature=mfcc";
  const auto dir = std::filesystem::temp_directory_path() / "synthattr-test-gmm";
  std::filesystem::create_directories(dir);
  classical::save_gmm((dir / "m.bin").string(), model);
  const auto loaded = classical::load_gmm((dir / "m.bin").string());
  CHECK(loaded.class_count == model.class_count);
  CHECK(loaded.log_priors == model.log_priors);
  for (int cls = 0; cls < 2; ++cls) {
    CHECK(loaded.classes[cls].weights == model.classes[cls].weights);
    CHECK(loaded.classes[cls].means.values == model.classes[cls].means.values);
    CHECK(loaded.classes[cls].variances.values ==
          model.classes[cls].variances.values);
  }
}
