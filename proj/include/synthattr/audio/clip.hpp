#pragma once

#include <optional>
#include <string>
#include <vector>

namespace synthattr::audio {

// Mono waveform with amplitudes in [-1, +1]. Clips are immutable values:
// every transform returns a new clip, so they are safe to share across
// worker threads.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;
  std::optional<int> label;
  std::string source_id;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

// Reads a RIFF/WAVE file with 16-bit PCM payload. Multi-channel input is
// downmixed by the arithmetic mean of the channels; integer samples are
// scaled by 1/32768 into [-1, 1).
// Throws NotWav, UnsupportedEncoding, EmptyPayload.
AudioClip load_wav(const std::string& path);

// Writes mono PCM16. Amplitudes are clipped to [-1, 1] on write.
void write_wav(const std::string& path, const AudioClip& clip);

// Repeats (whole-clip tiling, last repeat truncated) or trims the clip so
// its length is exactly round(target_seconds * sample_rate) samples.
AudioClip normalize_length(const AudioClip& clip, double target_seconds);

// Linear-interpolation resampling to target_rate. Output length is
// round(len * target / source).
AudioClip resample(const AudioClip& clip, int target_rate);

}  // namespace synthattr::audio
