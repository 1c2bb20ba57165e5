#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>

#include "synthattr/audio/clip.hpp"
#include "synthattr/common/parallel.hpp"
#include "synthattr/common/rng.hpp"
#include "synthattr/dsp/fft.hpp"
#include "synthattr/pipeline/pipeline.hpp"

namespace synthattr::pipeline {

namespace fs = std::filesystem;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// White noise shaped in the spectral domain to the requested dB/octave
// tilt around 1 kHz.
std::vector<double> tilted_noise(std::size_t n, double tilt_db_per_octave,
                                 int sample_rate, Rng& rng) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  std::vector<std::complex<double>> spec(m);
  for (std::size_t i = 0; i < m; ++i) spec[i] = {rng.gaussian(), 0.0};
  dsp::fft_pow2(spec, false);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(m);
    const double gain =
        k == 0 ? 0.0
               : std::pow(10.0, tilt_db_per_octave * std::log2(f / 1000.0) / 20.0);
    spec[k] *= gain;
    if (k > 0 && k < m / 2) spec[m - k] = std::conj(spec[k]);
  }
  dsp::fft_pow2(spec, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = spec[i].real();
  // Unit RMS.
  double power = 0.0;
  for (double v : out) power += v * v;
  power = std::sqrt(power / static_cast<double>(n));
  if (power > 0.0)
    for (auto& v : out) v /= power;
  return out;
}

}  // namespace

std::vector<double> synthesize_fixture_clip(const FixtureClassSpec& cls,
                                            double duration_s, int sample_rate,
                                            std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));

  const double f0 = cls.f0_hz * (1.0 + 0.03 * rng.gaussian());
  std::vector<double> harmonic_phase(cls.harmonics);
  for (auto& p : harmonic_phase) p = rng.uniform(0.0, kTwoPi);
  const double vibrato_phase = rng.uniform(0.0, kTwoPi);
  const double attack_s = rng.uniform(0.02, 0.1);
  const double decay_s = rng.uniform(2.0, 8.0);

  std::vector<double> out(n, 0.0);
  double phase = rng.uniform(0.0, kTwoPi);
  for (std::size_t t = 0; t < n; ++t) {
    const double seconds = static_cast<double>(t) / sample_rate;
    const double f_inst =
        f0 * (1.0 + cls.vibrato_depth *
                        std::sin(kTwoPi * cls.vibrato_hz * seconds + vibrato_phase));
    phase += kTwoPi * f_inst / sample_rate;
    double sample = 0.0;
    double amp = 1.0;
    for (int h = 0; h < cls.harmonics; ++h) {
      sample += amp * std::sin((h + 1) * phase + harmonic_phase[h]);
      amp *= cls.harmonic_decay;
    }
    const double env = std::min(seconds / attack_s, 1.0) * std::exp(-seconds / decay_s);
    out[t] = env * sample;
  }

  double power = 0.0;
  for (double v : out) power += v * v;
  power = std::sqrt(power / static_cast<double>(n));
  if (power > 0.0)
    for (auto& v : out) v /= power;

  const auto noise = tilted_noise(n, cls.tilt_db_per_octave, sample_rate, rng);
  for (std::size_t t = 0; t < n; ++t)
    out[t] = (1.0 - cls.noise_mix) * out[t] + cls.noise_mix * noise[t];

  double pk = 0.0;
  for (double v : out) pk = std::max(pk, std::abs(v));
  const double target_peak = rng.uniform(0.25, 0.55);
  if (pk > 0.0)
    for (auto& v : out) v *= target_peak / pk;
  return out;
}

FixtureSpec FixtureSpec::standard(int classes, int per_class, std::uint64_t seed) {
  const std::array<FixtureClassSpec, 6> base = {{
      {110.0, 10, 0.85, 0.15, -6.0, 4.5, 0.010, 8.26, 2.75},
      {150.0, 8, 0.70, 0.25, -3.0, 5.0, 0.015, 6.43, 2.08},
      {200.0, 9, 0.60, 0.10, 0.0, 5.5, 0.008, 6.36, 2.12},
      {260.0, 7, 0.80, 0.30, 3.0, 4.0, 0.020, 8.14, 2.56},
      {330.0, 6, 0.50, 0.20, 6.0, 6.0, 0.012, 5.62, 1.91},
      {420.0, 5, 0.75, 0.35, -9.0, 6.5, 0.018, 6.79, 2.22},
  }};
  if (classes < 1 || classes > static_cast<int>(base.size()))
    throw ConfigInvalid("fixture supports 1..6 classes");
  FixtureSpec spec;
  spec.classes.assign(base.begin(), base.begin() + classes);
  spec.per_class = per_class;
  spec.seed = seed;
  return spec;
}

DatasetManifest generate_fixture_corpus(const FixtureSpec& spec,
                                        const std::string& out_dir) {
  if (spec.per_class < 1) throw ConfigInvalid("per_class must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("cannot create " + out_dir);

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.seed = spec.seed;
  for (std::size_t cls = 0; cls < spec.classes.size(); ++cls) {
    fs::create_directories(fs::path(out_dir) / ("class" + std::to_string(cls)), ec);
    if (ec) throw IoFailure("cannot create class directory under " + out_dir);
    for (int i = 0; i < spec.per_class; ++i) {
      ManifestEntry e;
      e.relative_path =
          "class" + std::to_string(cls) + "/clip" + std::to_string(i) + ".wav";
      e.label = static_cast<int>(cls);
      e.split = Split::train;
      manifest.entries.push_back(std::move(e));
    }
  }

  parallel_for(
      0, static_cast<std::int64_t>(manifest.entries.size()),
      [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t idx = lo; idx < hi; ++idx) {
          const auto& e = manifest.entries[idx];
          const auto& cls = spec.classes[e.label];
          const std::uint64_t clip_seed =
              derive_seed(spec.seed, e.relative_path, 0xf1c5ULL);
          Rng dur_rng(splitmix64(clip_seed));
          double duration =
              cls.duration_mean_s + cls.duration_std_s * dur_rng.gaussian();
          duration = std::max(duration, 0.5);
          audio::AudioClip clip;
          clip.sample_rate = spec.sample_rate;
          clip.label = e.label;
          clip.source_id = e.relative_path;
          clip.samples =
              synthesize_fixture_clip(cls, duration, spec.sample_rate, clip_seed);
          audio::write_wav((fs::path(out_dir) / e.relative_path).string(), clip);
        }
      });

  write_manifest_csv((fs::path(out_dir) / "manifest.csv").string(), manifest);
  return manifest;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (auto v : counts) n += v;
  return n;
}

double ConfusionMatrix::accuracy() const {
  const std::int64_t n = total();
  if (n == 0) return 0.0;
  std::int64_t correct = 0;
  for (int c = 0; c < class_count; ++c) correct += at(c, c);
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace synthattr::pipeline
