#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthattr/nn/tensor.hpp"

namespace synthattr::nn {

// On-disk weights: versioned header (architecture id plus the named layer
// list with shapes), a digest guarding architecture/weight mismatch, then
// little-endian float32 values per parameter in declaration order.
struct CheckpointEntry {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::string arch_id;
  std::string config;  // key=value pairs, enough to rebuild the architecture
  std::vector<CheckpointEntry> entries;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Digest over (arch id, names, shapes); stored in the header and verified
// on read.
std::uint64_t checkpoint_digest(const Checkpoint& ckpt);

template <class T>
using BufferList = std::vector<std::pair<std::string, std::vector<T>*>>;

template <class T>
Checkpoint make_checkpoint(const std::string& arch_id, const std::string& config,
                           const std::vector<Param<T>*>& params,
                           const BufferList<T>& buffers = {}) {
  Checkpoint ckpt;
  ckpt.arch_id = arch_id;
  ckpt.config = config;
  for (const auto* p : params) {
    CheckpointEntry e;
    e.name = p->name;
    e.shape = p->value.shape;
    e.values.reserve(p->value.values.size());
    for (const T v : p->value.values) e.values.push_back(static_cast<float>(v));
    ckpt.entries.push_back(std::move(e));
  }
  for (const auto& [name, vec] : buffers) {
    CheckpointEntry e;
    e.name = name;
    e.shape = {static_cast<std::int64_t>(vec->size())};
    e.values.reserve(vec->size());
    for (const T v : *vec) e.values.push_back(static_cast<float>(v));
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

template <class T>
void load_into_params(const Checkpoint& ckpt, const std::vector<Param<T>*>& params,
                      const BufferList<T>& buffers = {}) {
  if (ckpt.entries.size() != params.size() + buffers.size())
    throw ShapeMismatch("checkpoint has " + std::to_string(ckpt.entries.size()) +
                        " entries, model has " +
                        std::to_string(params.size() + buffers.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = ckpt.entries[i];
    auto* p = params[i];
    if (e.name != p->name || e.shape != p->value.shape)
      throw ShapeMismatch("checkpoint parameter " + e.name +
                          " does not match model parameter " + p->name);
    for (std::size_t j = 0; j < e.values.size(); ++j)
      p->value.values[j] = static_cast<T>(e.values[j]);
  }
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    const auto& e = ckpt.entries[params.size() + i];
    auto& [name, vec] = buffers[i];
    if (e.name != name || e.values.size() != vec->size())
      throw ShapeMismatch("checkpoint buffer " + e.name +
                          " does not match model buffer " + name);
    for (std::size_t j = 0; j < e.values.size(); ++j)
      (*vec)[j] = static_cast<T>(e.values[j]);
  }
}

}  // namespace synthattr::nn
