#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace synthattr::pipeline {

enum class Split { train, val, test, eval };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

inline constexpr int kUnknownLabel = -1;

struct ManifestEntry {
  std::string relative_path;
  int label = kUnknownLabel;  // class id, or kUnknownLabel ('?' in CSV)
  Split split = Split::eval;
  std::string aug_tag;  // empty for original clips
};

// Declarative listing of clips, labels, and split membership. Paths are
// relative to root; augmented variants carry a provenance tag.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string root;
  std::uint64_t seed = 0;

  std::size_t count_in(Split s) const;
  std::size_t count_in(Split s, int label) const;
};

// CSV format: relative_path,label,split,aug_tag with '?' for unknown labels.
void write_manifest_csv(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest_csv(const std::string& path, const std::string& root);

// Validates path uniqueness; throws DataError on duplicates.
void check_manifest(const DatasetManifest& manifest);

}  // namespace synthattr::pipeline
