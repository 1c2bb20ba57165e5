#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "synthattr/audio/clip.hpp"
#include "synthattr/common/errors.hpp"
#include "synthattr/common/rng.hpp"
#include "testkit/oracles.hpp"

using namespace synthattr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "synthattr-test-audio";
  fs::create_directories(dir);
  return dir;
}

// Raw PCM16 writer independent of the production writer.
void write_raw_wav(const std::string& path, const std::vector<std::int16_t>& frames,
                   int channels, int rate) {
  std::ofstream os(path, std::ios::binary);
  auto u32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&os](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames.size() * 2);
  os.write("RIFF", 4);
  u32(36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  u32(16);
  u16(1);
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * 2));
  u16(static_cast<std::uint16_t>(channels * 2));
  u16(16);
  os.write("data", 4);
  u32(data_size);
  os.write(reinterpret_cast<const char*>(frames.data()), data_size);
}

}  // namespace

TEST_CASE("load_wav: 1 second of zeros") {
  const auto path = (temp_dir() / "zeros.wav").string();
  write_raw_wav(path, std::vector<std::int16_t>(16000, 0), 1, 16000);
  const auto clip = audio::load_wav(path);
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.samples.size() == 16000);
  for (double v : clip.samples) CHECK(v == 0.0);
}

TEST_CASE("load_wav: symmetric stereo downmixes to silence") {
  const auto path = (temp_dir() / "stereo.wav").string();
  std::vector<std::int16_t> frames;
  for (int i = 0; i < 100; ++i) {
    frames.push_back(16384);   // +0.5
    frames.push_back(-16384);  // -0.5
  }
  write_raw_wav(path, frames, 2, 8000);
  const auto clip = audio::load_wav(path);
  CHECK(clip.samples.size() == 100);
  for (double v : clip.samples) CHECK(v == 0.0);
}

TEST_CASE("load_wav: PCM16 16384 scales to 0.5") {
  const auto path = (temp_dir() / "half.wav").string();
  write_raw_wav(path, {16384, -16384, 32767, -32768}, 1, 16000);
  const auto clip = audio::load_wav(path);
  CHECK(clip.samples[0] == 0.5);
  CHECK(clip.samples[1] == -0.5);
  CHECK(clip.samples[2] == doctest::Approx(32767.0 / 32768.0));
  CHECK(clip.samples[3] == doctest::Approx(-1.0));
}

TEST_CASE("load_wav error identities") {
  const auto dir = temp_dir();
  {
    std::ofstream os(dir / "notwav.wav", std::ios::binary);
    os << "JUNKJUNKJUNKJUNKJUNK";
  }
  CHECK_THROWS_AS(audio::load_wav((dir / "notwav.wav").string()), NotWav);

  // IEEE float format tag.
  {
    std::ofstream os(dir / "float.wav", std::ios::binary);
    auto u32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    auto u16 = [&os](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
    os.write("RIFF", 4); u32(36); os.write("WAVE", 4);
    os.write("fmt ", 4); u32(16); u16(3); u16(1); u32(16000); u32(64000); u16(4); u16(32);
    os.write("data", 4); u32(0);
  }
  CHECK_THROWS_AS(audio::load_wav((dir / "float.wav").string()), UnsupportedEncoding);

  const auto empty = (dir / "empty.wav").string();
  write_raw_wav(empty, {}, 1, 16000);
  CHECK_THROWS_AS(audio::load_wav(empty), EmptyPayload);
}

TEST_CASE("write/load round-trips PCM16 bit-exactly") {
  const auto path = (temp_dir() / "roundtrip.wav").string();
  Rng rng(42);
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(4096);
  for (auto& v : clip.samples)
    v = static_cast<double>(static_cast<std::int64_t>(rng.integer(65536)) - 32768) /
        32768.0;
  audio::write_wav(path, clip);
  const auto loaded = audio::load_wav(path);
  REQUIRE(loaded.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(loaded.samples[i] == clip.samples[i]);
}

TEST_CASE("normalize_length identity at the target length") {
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(96000, 0.25);
  const auto out = audio::normalize_length(clip, 6.0);
  CHECK(out.samples.size() == 96000);
  CHECK(out.samples == clip.samples);
}

TEST_CASE("normalize_length tiles short clips by whole-clip repetition") {
  Rng rng(7);
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(48000);
  for (auto& v : clip.samples) v = rng.uniform(-1.0, 1.0);
  const auto out = audio::normalize_length(clip, 6.0);
  REQUIRE(out.samples.size() == 96000);
  for (std::size_t i = 0; i < 48000; ++i) {
    CHECK(out.samples[i] == clip.samples[i]);
    CHECK(out.samples[48000 + i] == clip.samples[i]);
  }
}

TEST_CASE("normalize_length trims long clips to the first N samples") {
  // 8.26 s, the mean duration of class 0.
  Rng rng(8);
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(static_cast<std::size_t>(8.26 * 16000));
  for (auto& v : clip.samples) v = rng.uniform(-1.0, 1.0);
  const auto out = audio::normalize_length(clip, 6.0);
  REQUIRE(out.samples.size() == 96000);
  for (std::size_t i = 0; i < 96000; ++i) CHECK(out.samples[i] == clip.samples[i]);
}

TEST_CASE("normalize_length: idempotence and exact lengths over a sweep") {
  Rng rng(99);
  const double target_s = 0.05;  // 800 samples at 16 kHz
  const std::size_t target = 800;
  for (std::size_t len = 1; len <= 3 * target; len += 37) {
    audio::AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples.resize(len);
    for (auto& v : clip.samples) v = rng.uniform(-1.0, 1.0);
    const auto once = audio::normalize_length(clip, target_s);
    CHECK(once.samples.size() == target);
    const auto twice = audio::normalize_length(once, target_s);
    CHECK(twice.samples == once.samples);
  }
}

TEST_CASE("normalize_length rejects empty clips") {
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  CHECK_THROWS_AS(audio::normalize_length(clip, 1.0), EmptyClip);
}

TEST_CASE("resample: same rate is bitwise identity") {
  Rng rng(3);
  audio::AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(1000);
  for (auto& v : clip.samples) v = rng.uniform(-1.0, 1.0);
  const auto out = audio::resample(clip, 16000);
  CHECK(out.samples == clip.samples);
}

TEST_CASE("resample: constant signal stays constant at double the length") {
  audio::AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(8000, 0.3);
  const auto out = audio::resample(clip, 16000);
  CHECK(out.sample_rate == 16000);
  CHECK(out.samples.size() == 16000);
  for (double v : out.samples) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("resample keeps a 1 kHz sine at 1 kHz (DFT oracle)") {
  audio::AudioClip clip;
  clip.sample_rate = 48000;
  clip.samples.resize(48000);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / 48000.0);

  const auto down = audio::resample(clip, 16000);
  REQUIRE(down.samples.size() == 16000);

  // Dominant bin of a 1600-sample window: 1 kHz is bin 100 at 16 kHz.
  std::vector<double> window(down.samples.begin(), down.samples.begin() + 1600);
  const auto spec = testkit::naive_dft(window);
  std::size_t best = 1;
  for (std::size_t k = 1; k < 800; ++k)
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  CHECK(best == 100);
}
