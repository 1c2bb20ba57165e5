#include "synthattr/audio/clip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "synthattr/common/errors.hpp"

namespace synthattr::audio {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();

  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw NotWav(path + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t chunk_size = read_u32(p + pos + 4);
    const bool is_fmt = std::memcmp(p + pos, "fmt ", 4) == 0;
    const bool is_data = std::memcmp(p + pos, "data", 4) == 0;
    const std::size_t body = pos + 8;
    if (body + chunk_size > n) break;
    if (is_fmt && chunk_size >= 16) {
      format = read_u16(p + body);
      channels = read_u16(p + body + 2);
      rate = read_u32(p + body + 4);
      bits = read_u16(p + body + 14);
      have_fmt = true;
    } else if (is_data) {
      data = p + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw NotWav(path + ": missing fmt chunk");
  if (format != 1 || bits != 16)
    throw UnsupportedEncoding(path + ": only 16-bit PCM is supported");
  if (channels == 0 || rate == 0) throw UnsupportedEncoding(path + ": bad fmt chunk");
  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data ? data_size / frame_bytes : 0;
  if (frames == 0) throw EmptyPayload(path + ": zero audio frames");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.source_id = path;
  clip.samples.resize(frames);
  const double scale = 1.0 / 32768.0;
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + f * frame_bytes + 2 * c;
      const auto v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
      acc += static_cast<double>(v);
    }
    clip.samples[f] = acc * scale / channels;
  }
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  if (clip.samples.empty()) throw EmptyClip("refusing to write empty clip");
  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_size);
  for (double x : clip.samples) {
    const double clipped = std::clamp(x, -1.0, 1.0);
    const long q = std::lround(clipped * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw IoFailure("short write to " + path);
}

AudioClip normalize_length(const AudioClip& clip, double target_seconds) {
  if (clip.samples.empty()) throw EmptyClip("normalize_length on empty clip");
  const auto target = static_cast<std::size_t>(
      std::llround(target_seconds * clip.sample_rate));
  AudioClip out = clip;
  if (clip.samples.size() >= target) {
    out.samples.resize(target);
    return out;
  }
  out.samples.resize(target);
  const std::size_t n = clip.samples.size();
  for (std::size_t i = n; i < target; ++i) out.samples[i] = clip.samples[i % n];
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ConfigInvalid("resample: target rate must be positive");
  if (clip.sample_rate == target_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  out.label = clip.label;
  out.source_id = clip.source_id;
  const std::size_t n = clip.samples.size();
  const auto m = static_cast<std::size_t>(std::llround(
      static_cast<double>(n) * target_rate / clip.sample_rate));
  out.samples.resize(m);
  const double step = static_cast<double>(clip.sample_rate) / target_rate;
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = i * step;
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) {
      out.samples[i] = clip.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(lo);
    out.samples[i] = (1.0 - frac) * clip.samples[lo] + frac * clip.samples[lo + 1];
  }
  return out;
}

}  // namespace synthattr::audio
