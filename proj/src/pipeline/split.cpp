#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "synthattr/common/rng.hpp"
#include "synthattr/pipeline/pipeline.hpp"

namespace synthattr::pipeline {

DatasetManifest stratified_split(const DatasetManifest& manifest,
                                 double train_fraction, double val_fraction,
                                 double test_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0 && val_fraction >= 0 && test_fraction >= 0))
    throw ConfigInvalid("split fractions must be non-negative");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigInvalid("split fractions must sum to 1");

  std::map<int, std::vector<std::size_t>> per_class;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    if (e.label != kUnknownLabel) per_class[e.label].push_back(i);
  }
  if (per_class.empty()) throw ClassTooSmall("no labeled entries to split");

  DatasetManifest out = manifest;
  out.seed = seed;
  for (auto& [label, indices] : per_class) {
    const std::size_t n = indices.size();
    const auto n_val = static_cast<std::size_t>(
        std::floor(val_fraction * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test;  // rounding residue
    if ((train_fraction > 0 && n_train == 0) || (val_fraction > 0 && n_val == 0) ||
        (test_fraction > 0 && n_test == 0))
      throw ClassTooSmall("class " + std::to_string(label) +
                          " too small for the requested fractions");

    Rng rng(derive_seed(seed, "split-class", static_cast<std::uint64_t>(label)));
    for (std::size_t i = n; i > 1; --i)
      std::swap(indices[i - 1], indices[rng.integer(i)]);

    for (std::size_t i = 0; i < n; ++i) {
      Split s = Split::train;
      if (i >= n_train) s = i < n_train + n_val ? Split::val : Split::test;
      out.entries[indices[i]].split = s;
    }
  }
  return out;
}

}  // namespace synthattr::pipeline
