#include "synthattr/dsp/features.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "synthattr/common/errors.hpp"
#include "synthattr/dsp/fft.hpp"

namespace synthattr::dsp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::string feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::stft_power: return "stft_power";
    case FeatureKind::mel_spectrogram: return "mel_spectrogram";
    case FeatureKind::log_mel: return "log_mel";
    case FeatureKind::mfcc: return "mfcc";
  }
  return "unknown";
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "stft_power") return FeatureKind::stft_power;
  if (name == "mel_spectrogram") return FeatureKind::mel_spectrogram;
  if (name == "log_mel") return FeatureKind::log_mel;
  if (name == "mfcc") return FeatureKind::mfcc;
  throw ConfigInvalid("unknown feature kind: " + name);
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

MelFilterbank build_filterbank(int sample_rate, int frame_length, std::size_t n_mels,
                               double f_min, double f_max) {
  const double nyquist = sample_rate / 2.0;
  if (n_mels < 2) throw BadBandEdges("n_mels must be >= 2");
  if (!(f_min >= 0.0) || !(f_min < f_max) || f_max > nyquist)
    throw BadBandEdges("need 0 <= f_min < f_max <= Nyquist");

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = static_cast<std::size_t>(frame_length) / 2 + 1;
  fb.f_min = f_min;
  fb.f_max = f_max;
  fb.weights.assign(fb.n_mels * fb.n_bins, 0.0);

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));

  const double bin_hz = static_cast<double>(sample_rate) / frame_length;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    // Area normalization: each triangle integrates to one over Hz.
    const double norm = 2.0 / (hi - lo);
    bool any = false;
    for (std::size_t b = 0; b < fb.n_bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > lo && f < center)
        w = (f - lo) / (center - lo);
      else if (f >= center && f < hi)
        w = (hi - f) / (hi - center);
      if (w > 0.0) {
        fb.weights[m * fb.n_bins + b] = w * norm;
        any = true;
      }
    }
    if (!any)
      throw BadBandEdges("mel filter " + std::to_string(m) +
                         " covers no FFT bin; widen the band or the frame");
  }
  return fb;
}

}  // namespace

const MelFilterbank& mel_filterbank(int sample_rate, int frame_length,
                                    std::size_t n_mels, double f_min, double f_max) {
  using Key = std::tuple<int, int, std::size_t, double, double>;
  static std::map<Key, MelFilterbank> cache;
  static std::mutex mutex;
  const Key key{sample_rate, frame_length, n_mels, f_min, f_max};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, build_filterbank(sample_rate, frame_length, n_mels,
                                             f_min, f_max)).first;
  return it->second;
}

FeatureMatrix stft_power(const audio::AudioClip& clip, const StftParams& params) {
  const std::size_t n = clip.samples.size();
  const auto frame = static_cast<std::size_t>(params.frame_length);
  const auto hop = static_cast<std::size_t>(params.hop_length);
  if (params.hop_length < 1) throw ConfigInvalid("hop_length must be >= 1");
  if (frame > n) throw ClipTooShort("clip shorter than one analysis frame");

  FeatureMatrix out;
  out.kind = FeatureKind::stft_power;
  out.frame_length = params.frame_length;
  out.hop_length = params.hop_length;
  out.sample_rate = clip.sample_rate;
  out.frames = 1 + (n - frame) / hop;
  out.coeffs = frame / 2 + 1;
  out.values.assign(out.frames * out.coeffs, 0.0);

  std::vector<double> window(frame, 1.0);
  if (params.window == WindowKind::hann)
    for (std::size_t i = 0; i < frame; ++i)
      window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / frame);

  std::vector<double> buf(frame);
  for (std::size_t f = 0; f < out.frames; ++f) {
    const double* src = clip.samples.data() + f * hop;
    for (std::size_t i = 0; i < frame; ++i) buf[i] = src[i] * window[i];
    const auto spec = rfft(buf);
    for (std::size_t b = 0; b < out.coeffs; ++b) out.at(f, b) = std::norm(spec[b]);
  }
  return out;
}

FeatureMatrix mel_spectrogram(const FeatureMatrix& power, std::size_t n_mels,
                              double f_min, double f_max) {
  if (power.kind != FeatureKind::stft_power)
    throw ConfigInvalid("mel_spectrogram expects an stft_power matrix");
  const MelFilterbank& fb =
      mel_filterbank(power.sample_rate, power.frame_length, n_mels, f_min, f_max);
  if (fb.n_bins != power.coeffs)
    throw ShapeMismatch("filterbank bins do not match the power matrix");

  FeatureMatrix out;
  out.kind = FeatureKind::mel_spectrogram;
  out.frame_length = power.frame_length;
  out.hop_length = power.hop_length;
  out.sample_rate = power.sample_rate;
  out.frames = power.frames;
  out.coeffs = n_mels;
  out.values.assign(out.frames * n_mels, 0.0);
  for (std::size_t f = 0; f < power.frames; ++f)
    for (std::size_t m = 0; m < n_mels; ++m) {
      double acc = 0.0;
      const double* w = fb.weights.data() + m * fb.n_bins;
      const double* p = power.values.data() + f * power.coeffs;
      for (std::size_t b = 0; b < fb.n_bins; ++b) acc += w[b] * p[b];
      out.at(f, m) = acc;
    }
  return out;
}

FeatureMatrix mfcc(const audio::AudioClip& clip, const MfccParams& params) {
  if (params.n_mfcc > params.n_mels)
    throw ConfigInvalid("n_mfcc must not exceed n_mels");
  const FeatureMatrix power = stft_power(clip, params.stft);
  const FeatureMatrix mel =
      mel_spectrogram(power, static_cast<std::size_t>(params.n_mels), params.f_min,
                      params.f_max);

  const auto n_mels = static_cast<std::size_t>(params.n_mels);
  const auto n_mfcc = static_cast<std::size_t>(params.n_mfcc);

  // Orthonormal DCT-II basis, n_mfcc x n_mels.
  std::vector<double> basis(n_mfcc * n_mels);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n_mels));
  const double scale = std::sqrt(2.0 / static_cast<double>(n_mels));
  for (std::size_t k = 0; k < n_mfcc; ++k)
    for (std::size_t m = 0; m < n_mels; ++m)
      basis[k * n_mels + m] =
          (k == 0 ? scale0 : scale) *
          std::cos(M_PI / static_cast<double>(n_mels) * (static_cast<double>(m) + 0.5) *
                   static_cast<double>(k));

  FeatureMatrix out;
  out.kind = FeatureKind::mfcc;
  out.frame_length = mel.frame_length;
  out.hop_length = mel.hop_length;
  out.sample_rate = mel.sample_rate;
  out.frames = mel.frames;
  out.coeffs = n_mfcc;
  out.values.assign(out.frames * n_mfcc, 0.0);

  std::vector<double> logmel(n_mels);
  for (std::size_t f = 0; f < mel.frames; ++f) {
    for (std::size_t m = 0; m < n_mels; ++m)
      logmel[m] = std::log(mel.at(f, m) + kLogFloor);
    for (std::size_t k = 0; k < n_mfcc; ++k) {
      double acc = 0.0;
      const double* row = basis.data() + k * n_mels;
      for (std::size_t m = 0; m < n_mels; ++m) acc += row[m] * logmel[m];
      out.at(f, k) = acc;
    }
  }
  return out;
}

std::vector<double> mfcc_stats(const FeatureMatrix& feat) {
  if (feat.frames < 2) throw TooFewFrames("mfcc_stats needs at least 2 frames");
  std::vector<double> out(2 * feat.coeffs, 0.0);
  const double inv = 1.0 / static_cast<double>(feat.frames);
  for (std::size_t c = 0; c < feat.coeffs; ++c) {
    double mean = 0.0;
    for (std::size_t f = 0; f < feat.frames; ++f) mean += feat.at(f, c);
    mean *= inv;
    double var = 0.0;
    for (std::size_t f = 0; f < feat.frames; ++f) {
      const double d = feat.at(f, c) - mean;
      var += d * d;
    }
    out[c] = mean;
    out[feat.coeffs + c] = std::sqrt(var * inv);
  }
  return out;
}

void write_feature_csv(const std::string& path, const FeatureMatrix& feat) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "# kind=" << feature_kind_name(feat.kind) << " frames=" << feat.frames
     << " coeffs=" << feat.coeffs << " frame_length=" << feat.frame_length
     << " hop_length=" << feat.hop_length << " sample_rate=" << feat.sample_rate
     << "\n";
  os.precision(17);
  for (std::size_t f = 0; f < feat.frames; ++f) {
    for (std::size_t c = 0; c < feat.coeffs; ++c) {
      if (c) os << ',';
      os << feat.at(f, c);
    }
    os << '\n';
  }
  if (!os) throw IoFailure("short write to " + path);
}

FeatureMatrix read_feature_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open " + path);
  std::string header;
  std::getline(is, header);
  FeatureMatrix feat;
  auto field = [&header](const std::string& key) {
    const auto pos = header.find(key + "=");
    if (pos == std::string::npos) throw DataError("bad feature header in " + header);
    const auto start = pos + key.size() + 1;
    return header.substr(start, header.find(' ', start) - start);
  };
  feat.kind = feature_kind_from_name(field("kind"));
  feat.frames = std::stoul(field("frames"));
  feat.coeffs = std::stoul(field("coeffs"));
  feat.frame_length = std::stoi(field("frame_length"));
  feat.hop_length = std::stoi(field("hop_length"));
  feat.sample_rate = std::stoi(field("sample_rate"));
  feat.values.reserve(feat.frames * feat.coeffs);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) feat.values.push_back(std::stod(cell));
  }
  if (feat.values.size() != feat.frames * feat.coeffs)
    throw DataError("feature CSV size mismatch in " + path);
  return feat;
}

namespace {
constexpr char kFeatMagic[8] = {'S', 'A', 'F', 'E', 'A', 'T', '0', '1'};
}

void write_feature_bin(const std::string& path, const FeatureMatrix& feat) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os.write(kFeatMagic, 8);
  const std::uint32_t kind = static_cast<std::uint32_t>(feat.kind);
  const std::uint64_t frames = feat.frames, coeffs = feat.coeffs;
  const std::int32_t fl = feat.frame_length, hl = feat.hop_length, sr = feat.sample_rate;
  os.write(reinterpret_cast<const char*>(&kind), 4);
  os.write(reinterpret_cast<const char*>(&frames), 8);
  os.write(reinterpret_cast<const char*>(&coeffs), 8);
  os.write(reinterpret_cast<const char*>(&fl), 4);
  os.write(reinterpret_cast<const char*>(&hl), 4);
  os.write(reinterpret_cast<const char*>(&sr), 4);
  os.write(reinterpret_cast<const char*>(feat.values.data()),
           static_cast<std::streamsize>(feat.values.size() * sizeof(double)));
  if (!os) throw IoFailure("short write to " + path);
}

FeatureMatrix read_feature_bin(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kFeatMagic, 8) != 0)
    throw DataError(path + ": not a feature binary");
  std::uint32_t kind;
  std::uint64_t frames, coeffs;
  std::int32_t fl, hl, sr;
  is.read(reinterpret_cast<char*>(&kind), 4);
  is.read(reinterpret_cast<char*>(&frames), 8);
  is.read(reinterpret_cast<char*>(&coeffs), 8);
  is.read(reinterpret_cast<char*>(&fl), 4);
  is.read(reinterpret_cast<char*>(&hl), 4);
  is.read(reinterpret_cast<char*>(&sr), 4);
  FeatureMatrix feat;
  feat.kind = static_cast<FeatureKind>(kind);
  feat.frames = frames;
  feat.coeffs = coeffs;
  feat.frame_length = fl;
  feat.hop_length = hl;
  feat.sample_rate = sr;
  feat.values.resize(frames * coeffs);
  is.read(reinterpret_cast<char*>(feat.values.data()),
          static_cast<std::streamsize>(feat.values.size() * sizeof(double)));
  if (!is) throw DataError(path + ": truncated feature binary");
  return feat;
}

}  // namespace synthattr::dsp
