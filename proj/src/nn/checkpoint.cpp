#include "synthattr/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "synthattr/common/rng.hpp"

namespace synthattr::nn {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'T', 'C', 'K', 'P', 'T', '1'};

void put_string(std::ofstream& os, const std::string& s) {
  const auto len = static_cast<std::uint32_t>(s.size());
  os.write(reinterpret_cast<const char*>(&len), 4);
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& is) {
  std::uint32_t len = 0;
  is.read(reinterpret_cast<char*>(&len), 4);
  std::string s(len, '\0');
  is.read(s.data(), len);
  return s;
}

}  // namespace

std::uint64_t checkpoint_digest(const Checkpoint& ckpt) {
  std::string blob = ckpt.arch_id + '\x1f' + ckpt.config;
  for (const auto& e : ckpt.entries) {
    blob += '\n';
    blob += e.name;
    for (auto d : e.shape) {
      blob += ':';
      blob += std::to_string(d);
    }
  }
  return fnv1a(blob);
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os.write(kMagic, 8);
  put_string(os, ckpt.arch_id);
  put_string(os, ckpt.config);
  const auto count = static_cast<std::uint32_t>(ckpt.entries.size());
  os.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& e : ckpt.entries) {
    put_string(os, e.name);
    const auto ndim = static_cast<std::uint32_t>(e.shape.size());
    os.write(reinterpret_cast<const char*>(&ndim), 4);
    for (auto d : e.shape) os.write(reinterpret_cast<const char*>(&d), 8);
  }
  const std::uint64_t digest = checkpoint_digest(ckpt);
  os.write(reinterpret_cast<const char*>(&digest), 8);
  for (const auto& e : ckpt.entries)
    os.write(reinterpret_cast<const char*>(e.values.data()),
             static_cast<std::streamsize>(e.values.size() * sizeof(float)));
  if (!os) throw IoFailure("short write to " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError(path + ": not a checkpoint file");
  Checkpoint ckpt;
  ckpt.arch_id = get_string(is);
  ckpt.config = get_string(is);
  std::uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), 4);
  ckpt.entries.resize(count);
  for (auto& e : ckpt.entries) {
    e.name = get_string(is);
    std::uint32_t ndim = 0;
    is.read(reinterpret_cast<char*>(&ndim), 4);
    e.shape.resize(ndim);
    for (auto& d : e.shape) is.read(reinterpret_cast<char*>(&d), 8);
  }
  std::uint64_t digest = 0;
  is.read(reinterpret_cast<char*>(&digest), 8);
  if (!is || digest != checkpoint_digest(ckpt))
    throw DataError(path + ": checkpoint digest mismatch");
  for (auto& e : ckpt.entries) {
    std::int64_t n = 1;
    for (auto d : e.shape) n *= d;
    e.values.resize(static_cast<std::size_t>(n));
    is.read(reinterpret_cast<char*>(e.values.data()),
            static_cast<std::streamsize>(e.values.size() * sizeof(float)));
  }
  if (!is) throw DataError(path + ": truncated checkpoint");
  return ckpt;
}

}  // namespace synthattr::nn
