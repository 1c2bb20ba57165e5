#include "synthattr/pipeline/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "synthattr/common/errors.hpp"

namespace synthattr::pipeline {

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::eval: return "eval";
  }
  return "eval";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "eval") return Split::eval;
  throw ConfigInvalid("unknown split: " + name);
}

std::size_t DatasetManifest::count_in(Split s) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.split == s;
  return n;
}

std::size_t DatasetManifest::count_in(Split s, int label) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.split == s && e.label == label;
  return n;
}

void write_manifest_csv(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "relative_path,label,split,aug_tag\n";
  for (const auto& e : manifest.entries) {
    os << e.relative_path << ',';
    if (e.label == kUnknownLabel)
      os << '?';
    else
      os << e.label;
    os << ',' << split_name(e.split) << ',' << e.aug_tag << '\n';
  }
  if (!os) throw IoFailure("short write to " + path);
}

DatasetManifest read_manifest_csv(const std::string& path, const std::string& root) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path);
  DatasetManifest manifest;
  manifest.root = root;
  std::string line;
  std::getline(is, line);  // header
  if (line.rfind("relative_path", 0) != 0)
    throw DataError(path + ": missing manifest header");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    ManifestEntry e;
    std::string label, split;
    if (!std::getline(ss, e.relative_path, ',') || !std::getline(ss, label, ',') ||
        !std::getline(ss, split, ','))
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed row");
    std::getline(ss, e.aug_tag);  // may be empty
    e.label = label == "?" ? kUnknownLabel : std::stoi(label);
    e.split = split_from_name(split);
    manifest.entries.push_back(std::move(e));
  }
  check_manifest(manifest);
  return manifest;
}

void check_manifest(const DatasetManifest& manifest) {
  std::unordered_set<std::string> seen;
  for (const auto& e : manifest.entries)
    if (!seen.insert(e.relative_path).second)
      throw DataError("duplicate manifest path: " + e.relative_path);
}

}  // namespace synthattr::pipeline
