#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthattr/audio/clip.hpp"
#include "synthattr/pipeline/manifest.hpp"

namespace synthattr::augment {

enum class AugmentKind { noise, reverb, codec };

// One parametric transform. Only the parameters of the active kind matter;
// the rest are ignored. Identical spec + identical input clip gives a
// bit-identical output.
struct AugmentationSpec {
  AugmentKind kind = AugmentKind::noise;
  double snr_db = 10.0;        // noise
  double rt60_seconds = 0.3;   // reverb
  double bandwidth_hz = 6000;  // codec
  int bit_depth = 16;          // codec
  std::uint64_t seed = 0;

  // Round-trippable text form, e.g. "noise:snr_db=10:seed=7".
  std::string tag() const;
  static AugmentationSpec parse(const std::string& text);
};

// Additive white Gaussian noise scaled so that the measured
// 10*log10(P_signal/P_noise) equals snr_db; output clamped to [-1, 1].
// snr_db = +inf is the no-noise passthrough. Throws SilentClip when the
// input has zero power.
audio::AudioClip add_noise(const audio::AudioClip& clip, double snr_db,
                           std::uint64_t seed);

// Convolution with a synthetic room impulse response: seeded Gaussian noise
// under the envelope exp(-6.91 t / rt60), truncated at rt60, then
// peak-renormalized to the input's peak. rt60 = 0 is the identity.
audio::AudioClip add_reverb(const audio::AudioClip& clip, double rt60_seconds,
                            std::uint64_t seed);

// Lossy-codec stand-in: windowed-sinc low-pass at bandwidth_hz followed by
// uniform requantization to 2^bit_depth levels.
audio::AudioClip simulate_codec(const audio::AudioClip& clip, double bandwidth_hz,
                                int bit_depth);

// External encoder escape hatch: two command templates with {in}/{out}
// placeholders, round-tripping through temp files. Empty commands select
// the built-in simulation.
struct CodecHook {
  std::string encode_cmd;
  std::string decode_cmd;
  bool configured() const { return !encode_cmd.empty() && !decode_cmd.empty(); }
};

audio::AudioClip external_codec(const audio::AudioClip& clip, const CodecHook& hook);

audio::AudioClip apply(const audio::AudioClip& clip, const AugmentationSpec& spec,
                       const CodecHook& hook = {});

// Default parameter ranges used when sampling specs randomly:
// SNR in [5, 30] dB, RT60 in [0.1, 0.7] s, bandwidth in [4, 8] kHz,
// bit depth in {8, 12, 16}.
std::vector<AugmentationSpec> sample_default_specs(std::uint64_t seed);

// Keeps every original entry and appends one augmented variant per spec,
// each tagged with its provenance and a seed derived from
// (manifest seed, source path, spec index). Augmented variants inherit the
// source's label and split. Entries that are already augmented are kept
// but not re-expanded.
pipeline::DatasetManifest expand_with_augmentations(
    const pipeline::DatasetManifest& manifest,
    const std::vector<AugmentationSpec>& specs);

// Writes the WAV file behind every augmented entry of the manifest (the
// spec and seed are recovered from the entry tag). Parallel across entries.
void materialize_augmentations(const pipeline::DatasetManifest& manifest,
                               const CodecHook& hook = {});

// aug/<spec index>/<source relative path>
std::string augmented_path(std::size_t spec_index, const std::string& source_path);
std::string augmented_source(const std::string& augmented_path);

}  // namespace synthattr::augment
