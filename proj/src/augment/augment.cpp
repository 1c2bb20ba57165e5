#include "synthattr/augment/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "synthattr/common/errors.hpp"
#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"
#include "synthattr/dsp/fft.hpp"

namespace synthattr::augment {

namespace fs = std::filesystem;

namespace {

const char* kind_name(AugmentKind k) {
  switch (k) {
    case AugmentKind::noise: return "noise";
    case AugmentKind::reverb: return "reverb";
    case AugmentKind::codec: return "codec";
  }
  return "noise";
}

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double peak(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

std::string AugmentationSpec::tag() const {
  std::ostringstream os;
  os << kind_name(kind) << ':';
  switch (kind) {
    case AugmentKind::noise:
      os << "snr_db=" << snr_db << ":seed=" << seed;
      break;
    case AugmentKind::reverb:
      os << "rt60=" << rt60_seconds << ":seed=" << seed;
      break;
    case AugmentKind::codec:
      os << "bandwidth_hz=" << bandwidth_hz << ":bit_depth=" << bit_depth;
      break;
  }
  return os.str();
}

AugmentationSpec AugmentationSpec::parse(const std::string& text) {
  AugmentationSpec spec;
  std::stringstream ss(text);
  std::string head;
  if (!std::getline(ss, head, ':')) throw ConfigInvalid("empty augmentation spec");
  if (head == "noise")
    spec.kind = AugmentKind::noise;
  else if (head == "reverb")
    spec.kind = AugmentKind::reverb;
  else if (head == "codec")
    spec.kind = AugmentKind::codec;
  else
    throw ConfigInvalid("unknown augmentation kind: " + head);
  std::string part;
  while (std::getline(ss, part, ':')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("bad augmentation parameter: " + part);
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "snr_db")
      spec.snr_db = std::stod(value);
    else if (key == "rt60")
      spec.rt60_seconds = std::stod(value);
    else if (key == "bandwidth_hz")
      spec.bandwidth_hz = std::stod(value);
    else if (key == "bit_depth")
      spec.bit_depth = std::stoi(value);
    else if (key == "seed")
      spec.seed = std::stoull(value);
    else
      throw ConfigInvalid("unknown augmentation parameter: " + key);
  }
  return spec;
}

audio::AudioClip add_noise(const audio::AudioClip& clip, double snr_db,
                           std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0) return clip;
  const double p_signal = mean_power(clip.samples);
  if (p_signal <= 0.0) throw SilentClip("SNR undefined for a zero-power clip");

  Rng rng(seed);
  std::vector<double> noise(clip.samples.size());
  for (auto& v : noise) v = rng.gaussian();
  // Scale the drawn vector so the realized noise power hits the target
  // exactly rather than only in expectation.
  const double p_target = p_signal / std::pow(10.0, snr_db / 10.0);
  const double p_drawn = mean_power(noise);
  const double scale = std::sqrt(p_target / p_drawn);

  audio::AudioClip out = clip;
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = std::clamp(clip.samples[i] + scale * noise[i], -1.0, 1.0);
  return out;
}

audio::AudioClip add_reverb(const audio::AudioClip& clip, double rt60_seconds,
                            std::uint64_t seed) {
  if (rt60_seconds < 0.0) throw ConfigInvalid("rt60 must be >= 0");
  if (clip.samples.empty()) throw EmptyClip("add_reverb on empty clip");
  const auto rir_len = static_cast<std::size_t>(
      std::llround(rt60_seconds * clip.sample_rate));
  if (rir_len <= 1) return clip;  // unit impulse response

  // -60 dB energy decay over rt60: amplitude envelope exp(-6.91 t / rt60)
  // with 6.91 = ln(10^3).
  Rng rng(seed);
  std::vector<double> rir(rir_len);
  for (std::size_t t = 0; t < rir_len; ++t) {
    const double seconds = static_cast<double>(t) / clip.sample_rate;
    rir[t] = rng.gaussian() * std::exp(-6.91 * seconds / rt60_seconds);
  }

  auto wet = dsp::fft_convolve(clip.samples, rir);
  wet.resize(clip.samples.size());  // tail truncated

  const double in_peak = peak(clip.samples);
  const double out_peak = peak(wet);
  if (out_peak > 0.0) {
    const double gain = in_peak / out_peak;
    for (auto& v : wet) v *= gain;
  }
  audio::AudioClip out = clip;
  out.samples = std::move(wet);
  return out;
}

audio::AudioClip simulate_codec(const audio::AudioClip& clip, double bandwidth_hz,
                                int bit_depth) {
  const double nyquist = clip.sample_rate / 2.0;
  if (bandwidth_hz <= 0.0) throw ConfigInvalid("bandwidth must be positive");
  if (bandwidth_hz > nyquist)
    throw BandwidthAboveNyquist("bandwidth " + std::to_string(bandwidth_hz) +
                                " Hz above Nyquist");
  if (bit_depth < 2 || bit_depth > 16)
    throw ConfigInvalid("bit_depth must be in [2, 16]");

  // Windowed-sinc low-pass (Hamming, 101 taps). At Nyquist the kernel
  // degenerates to a unit impulse.
  constexpr int kTaps = 101;
  constexpr int kHalf = kTaps / 2;
  const double fn = 2.0 * bandwidth_hz / clip.sample_rate;
  std::vector<double> h(kTaps);
  for (int i = 0; i < kTaps; ++i) {
    const double t = static_cast<double>(i - kHalf);
    const double x = fn * t;
    const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / (kTaps - 1));
    h[i] = fn * sinc * window;
  }

  auto full = dsp::fft_convolve(clip.samples, h);
  audio::AudioClip out = clip;
  const std::size_t n = clip.samples.size();
  const double levels_half = static_cast<double>((1 << bit_depth) - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double filtered = std::clamp(full[i + kHalf], -1.0, 1.0);
    // Uniform quantizer over [-1, 1] with 2^bit_depth levels.
    out.samples[i] = std::round((filtered + 1.0) * levels_half) / levels_half - 1.0;
  }
  return out;
}

audio::AudioClip external_codec(const audio::AudioClip& clip, const CodecHook& hook) {
  if (!hook.configured()) throw ConfigInvalid("external codec hook not configured");
  static std::atomic<unsigned> counter{0};
  static const unsigned run_token = std::random_device{}();
  const unsigned id = counter++;
  const fs::path dir = fs::temp_directory_path();
  const std::string stem =
      "synthattr-codec-" + std::to_string(run_token) + "-" + std::to_string(id);
  const fs::path in = dir / (stem + "-in.wav");
  const fs::path mid = dir / (stem + "-mid.bin");
  const fs::path out = dir / (stem + "-out.wav");

  auto expand = [](std::string tpl, const std::string& i, const std::string& o) {
    for (const auto& [key, value] :
         {std::pair<std::string, std::string>{"{in}", i}, {"{out}", o}}) {
      for (std::size_t pos = tpl.find(key); pos != std::string::npos;
           pos = tpl.find(key))
        tpl.replace(pos, key.size(), value);
    }
    return tpl;
  };

  audio::write_wav(in.string(), clip);
  const std::string enc = expand(hook.encode_cmd, in.string(), mid.string());
  const std::string dec = expand(hook.decode_cmd, mid.string(), out.string());
  if (std::system(enc.c_str()) != 0) throw IoFailure("encode command failed: " + enc);
  if (std::system(dec.c_str()) != 0) throw IoFailure("decode command failed: " + dec);
  audio::AudioClip decoded = audio::load_wav(out.string());
  decoded.label = clip.label;
  decoded.source_id = clip.source_id;
  std::error_code ec;
  fs::remove(in, ec);
  fs::remove(mid, ec);
  fs::remove(out, ec);
  return decoded;
}

audio::AudioClip apply(const audio::AudioClip& clip, const AugmentationSpec& spec,
                       const CodecHook& hook) {
  switch (spec.kind) {
    case AugmentKind::noise:
      return add_noise(clip, spec.snr_db, spec.seed);
    case AugmentKind::reverb:
      return add_reverb(clip, spec.rt60_seconds, spec.seed);
    case AugmentKind::codec:
      if (hook.configured()) return external_codec(clip, hook);
      return simulate_codec(clip, spec.bandwidth_hz, spec.bit_depth);
  }
  throw ConfigInvalid("bad augmentation kind");
}

std::vector<AugmentationSpec> sample_default_specs(std::uint64_t seed) {
  Rng rng(seed);
  AugmentationSpec noise;
  noise.kind = AugmentKind::noise;
  noise.snr_db = rng.uniform(5.0, 30.0);
  AugmentationSpec reverb;
  reverb.kind = AugmentKind::reverb;
  reverb.rt60_seconds = rng.uniform(0.1, 0.7);
  AugmentationSpec codec;
  codec.kind = AugmentKind::codec;
  codec.bandwidth_hz = rng.uniform(4000.0, 8000.0);
  codec.bit_depth = 8 + 4 * static_cast<int>(rng.integer(3));
  return {noise, reverb, codec};
}

std::string augmented_path(std::size_t spec_index, const std::string& source_path) {
  return "aug/" + std::to_string(spec_index) + "/" + source_path;
}

std::string augmented_source(const std::string& path) {
  if (path.rfind("aug/", 0) != 0) throw DataError("not an augmented path: " + path);
  const auto slash = path.find('/', 4);
  if (slash == std::string::npos) throw DataError("not an augmented path: " + path);
  return path.substr(slash + 1);
}

pipeline::DatasetManifest expand_with_augmentations(
    const pipeline::DatasetManifest& manifest,
    const std::vector<AugmentationSpec>& specs) {
  if (specs.empty()) throw ConfigInvalid("expand_with_augmentations needs >= 1 spec");
  pipeline::DatasetManifest out = manifest;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& e : manifest.entries) {
      if (!e.aug_tag.empty()) continue;  // do not stack augmentations
      AugmentationSpec spec = specs[i];
      spec.seed = derive_seed(manifest.seed, e.relative_path, i);
      pipeline::ManifestEntry aug = e;
      aug.relative_path = augmented_path(i, e.relative_path);
      aug.aug_tag = spec.tag();
      out.entries.push_back(std::move(aug));
    }
  }
  return out;
}

void materialize_augmentations(const pipeline::DatasetManifest& manifest,
                               const CodecHook& hook) {
  std::vector<const pipeline::ManifestEntry*> todo;
  for (const auto& e : manifest.entries)
    if (!e.aug_tag.empty()) todo.push_back(&e);

  // Create directories up front; the transform loop is then write-disjoint.
  for (const auto* e : todo) {
    const fs::path target = fs::path(manifest.root) / e->relative_path;
    fs::create_directories(target.parent_path());
  }

  parallel_for(0, static_cast<std::int64_t>(todo.size()),
               [&](std::int64_t lo, std::int64_t hi) {
                 for (std::int64_t i = lo; i < hi; ++i) {
                   const auto& e = *todo[i];
                   const AugmentationSpec spec = AugmentationSpec::parse(e.aug_tag);
                   const std::string src =
                       (fs::path(manifest.root) / augmented_source(e.relative_path))
                           .string();
                   audio::AudioClip clip = audio::load_wav(src);
                   clip.label = e.label == pipeline::kUnknownLabel
                                    ? std::optional<int>{}
                                    : std::optional<int>{e.label};
                   const audio::AudioClip transformed = apply(clip, spec, hook);
                   audio::write_wav(
                       (fs::path(manifest.root) / e.relative_path).string(),
                       transformed);
                 }
               });
}

}  // namespace synthattr::augment
