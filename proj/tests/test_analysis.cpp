#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "synthattr/analysis/analysis.hpp"
#include "synthattr/common/rng.hpp"
#include "testkit/oracles.hpp"

using namespace synthattr;

namespace {

Matrix two_distant_clusters(std::size_t per_cluster, double separation,
                            std::uint64_t seed, std::vector<int>* labels) {
  Rng rng(seed);
  Matrix x(2 * per_cluster, 4);
  labels->resize(2 * per_cluster);
  for (std::size_t r = 0; r < 2 * per_cluster; ++r) {
    const int cls = r < per_cluster ? 0 : 1;
    for (std::size_t c = 0; c < 4; ++c)
      x.at(r, c) = (c == 0 ? (cls == 0 ? 0.0 : separation) : 0.0) + rng.gaussian();
    (*labels)[r] = cls;
  }
  return x;
}

}  // namespace

TEST_CASE("pca: collinear points put 100% of variance on the first component") {
  Rng rng(1);
  Matrix x(50, 2);
  for (std::size_t r = 0; r < 50; ++r) {
    const double t = rng.uniform(-3, 3);
    x.at(r, 0) = t;
    x.at(r, 1) = 2.0 * t;
  }
  const auto res = analysis::pca_fit_transform(x, 1);
  REQUIRE(res.explained_ratio.size() == 1);
  CHECK(res.explained_ratio[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca: isotropic cloud spreads variance roughly evenly") {
  Rng rng(3);
  Matrix x(1000, 2);
  for (auto& v : x.values) v = rng.gaussian();
  const auto res = analysis::pca_fit_transform(x, 2);
  CHECK(std::abs(res.explained_ratio[0] - 0.5) < 0.1);
  CHECK(std::abs(res.explained_ratio[1] - 0.5) < 0.1);
}

TEST_CASE("pca: full-rank reconstruction reproduces the data") {
  Rng rng(5);
  Matrix x(40, 6);
  for (auto& v : x.values) v = rng.uniform(-2, 2);
  const auto res = analysis::pca_fit_transform(x, 6);
  const auto back = res.inverse(res.transformed);
  for (std::size_t i = 0; i < x.values.size(); ++i)
    CHECK(std::abs(back.values[i] - x.values[i]) < 1e-8);
}

TEST_CASE("pca: output columns are uncorrelated") {
  Rng rng(7);
  Matrix x(300, 5);
  for (std::size_t r = 0; r < 300; ++r) {
    const double base = rng.gaussian();
    for (std::size_t c = 0; c < 5; ++c)
      x.at(r, c) = base * (1.0 + 0.3 * c) + rng.gaussian() * (0.2 + 0.1 * c);
  }
  const auto res = analysis::pca_fit_transform(x, 5);
  const auto& y = res.transformed;
  std::vector<double> mean(5, 0.0), var(5, 0.0);
  for (std::size_t r = 0; r < y.rows; ++r)
    for (std::size_t c = 0; c < 5; ++c) mean[c] += y.at(r, c);
  for (auto& m : mean) m /= static_cast<double>(y.rows);
  for (std::size_t r = 0; r < y.rows; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      const double d = y.at(r, c) - mean[c];
      var[c] += d * d;
    }
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = a + 1; b < 5; ++b) {
      double cov = 0.0;
      for (std::size_t r = 0; r < y.rows; ++r)
        cov += (y.at(r, a) - mean[a]) * (y.at(r, b) - mean[b]);
      CHECK(std::abs(cov) / std::sqrt(var[a] * var[b]) < 1e-8);
    }
}

TEST_CASE("pca: deterministic sign convention and rank warning") {
  Rng rng(9);
  Matrix x(30, 3);
  for (std::size_t r = 0; r < 30; ++r) {
    const double t = rng.uniform(-1, 1);
    x.at(r, 0) = t;
    x.at(r, 1) = -t;
    x.at(r, 2) = 2.0 * t;  // rank-1 data
  }
  const auto res = analysis::pca_fit_transform(x, 3);
  CHECK(res.rank_warning);
  CHECK(res.components.rows < 3);
  // Largest-magnitude loading of each returned component is positive.
  for (std::size_t k = 0; k < res.components.rows; ++k) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < 3; ++c)
      if (std::abs(res.components.at(k, c)) > std::abs(res.components.at(k, arg)))
        arg = c;
    CHECK(res.components.at(k, arg) > 0.0);
  }
}

TEST_CASE("tsne: perplexity calibration hits log2(perplexity)") {
  Rng rng(11);
  const std::size_t n = 120;
  Matrix x(n, 3);
  for (auto& v : x.values) v = rng.gaussian();
  for (const std::size_t self : {std::size_t{0}, std::size_t{60}}) {
    std::vector<double> d2(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double diff = x.at(self, c) - x.at(j, c);
        acc += diff * diff;
      }
      d2[j] = acc;
    }
    const auto cal = analysis::calibrate_affinity_row(d2, self, 30.0);
    CHECK(std::abs(cal.entropy_bits - std::log2(30.0)) < 1e-4);
    CHECK(cal.p[self] == 0.0);
    double sum = 0.0;
    for (double v : cal.p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("tsne separates two distant clusters (silhouette > 0.5)") {
  std::vector<int> labels;
  const auto x = two_distant_clusters(50, 20.0, 13, &labels);
  analysis::TsneOptions options;
  options.perplexity = 15.0;
  options.iterations = 400;
  options.seed = 1;
  const auto res = analysis::tsne_embed(x, options);
  CHECK(res.embedding.rows == 100);
  CHECK(res.embedding.cols == 2);
  CHECK(analysis::silhouette_score(res.embedding, labels) > 0.5);
  CHECK(res.kl_final < res.kl_first);
}

TEST_CASE("tsne is deterministic given (inputs, seed)") {
  std::vector<int> labels;
  const auto x = two_distant_clusters(20, 10.0, 17, &labels);
  analysis::TsneOptions options;
  options.perplexity = 8.0;
  options.iterations = 120;
  options.seed = 42;
  const auto a = analysis::tsne_embed(x, options);
  const auto b = analysis::tsne_embed(x, options);
  CHECK(a.embedding.values == b.embedding.values);
  options.seed = 43;
  const auto c = analysis::tsne_embed(x, options);
  CHECK(a.embedding.values != c.embedding.values);
}

TEST_CASE("tsne rejects an oversized perplexity") {
  Matrix x(30, 2);
  analysis::TsneOptions options;
  options.perplexity = 10.0;  // 3 * 10 >= 30
  CHECK_THROWS_AS(analysis::tsne_embed(x, options), PerplexityTooLarge);
}

TEST_CASE("silhouette: two collapsed classes score exactly 1") {
  Matrix x(6, 2);
  std::vector<int> labels(6);
  for (std::size_t r = 0; r < 6; ++r) {
    const int cls = r < 3 ? 0 : 1;
    x.at(r, 0) = cls == 0 ? 0.0 : 9.0;
    x.at(r, 1) = 0.0;
    labels[r] = cls;
  }
  CHECK(analysis::silhouette_score(x, labels) == doctest::Approx(1.0));
}

TEST_CASE("silhouette: shuffled labels on one cloud stay near 0") {
  Rng rng(19);
  const std::size_t n = 500;
  Matrix x(n, 3);
  for (auto& v : x.values) v = rng.gaussian();
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.integer(2));
  CHECK(std::abs(analysis::silhouette_score(x, labels)) < 0.1);
}

TEST_CASE("silhouette rejects a single class") {
  Matrix x(4, 2);
  CHECK_THROWS_AS(analysis::silhouette_score(x, {0, 0, 0, 0}), SingleClass);
}

TEST_CASE("separation_report: centroid distances and dispersion") {
  std::vector<int> labels;
  const auto x = two_distant_clusters(40, 12.0, 23, &labels);
  const auto report = analysis::separation_report(x, labels);
  CHECK(report.silhouette > 0.5);
  CHECK(report.centroid_distances.at(0, 0) == 0.0);
  CHECK(report.centroid_distances.at(0, 1) ==
        doctest::Approx(report.centroid_distances.at(1, 0)));
  CHECK(report.centroid_distances.at(0, 1) > 8.0);
  CHECK(report.mean_intra_dispersion < 4.0);
}

TEST_CASE("embedding CSV and scatter SVG are written") {
  std::vector<int> labels;
  const auto x = two_distant_clusters(10, 6.0, 29, &labels);
  Matrix xy(x.rows, 2);
  for (std::size_t r = 0; r < x.rows; ++r) {
    xy.at(r, 0) = x.at(r, 0);
    xy.at(r, 1) = x.at(r, 1);
  }
  const auto dir = std::filesystem::temp_directory_path() / "synthattr-test-analysis";
  std::filesystem::create_directories(dir);
  analysis::write_embedding_csv((dir / "emb.csv").string(), xy, labels, "test");
  analysis::write_scatter_svg((dir / "emb.svg").string(), xy, labels, "test plot");

  std::ifstream csv(dir / "emb.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,label,source");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 20);

  std::ifstream svg(dir / "emb.svg");
  const std::string content((std::istreambuf_iterator<char>(svg)),
                            std::istreambuf_iterator<char>());
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("circle") != std::string::npos);
  CHECK(content.find("test plot") != std::string::npos);
}
