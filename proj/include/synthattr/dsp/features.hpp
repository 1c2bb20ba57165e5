#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthattr/audio/clip.hpp"

namespace synthattr::dsp {

enum class FeatureKind { stft_power, mel_spectrogram, log_mel, mfcc };

enum class WindowKind { hann, rectangular };

std::string feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_name(const std::string& name);

// frames x coefficients matrix, row-major.
struct FeatureMatrix {
  std::vector<double> values;
  std::size_t frames = 0;
  std::size_t coeffs = 0;
  FeatureKind kind = FeatureKind::stft_power;
  int frame_length = 0;
  int hop_length = 0;
  int sample_rate = 0;

  double& at(std::size_t f, std::size_t c) { return values[f * coeffs + c]; }
  double at(std::size_t f, std::size_t c) const { return values[f * coeffs + c]; }
};

// Triangular mel filters (HTK scale, area-normalized), n_mels x n_bins.
struct MelFilterbank {
  std::vector<double> weights;
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  double f_min = 0.0;
  double f_max = 0.0;

  double at(std::size_t m, std::size_t b) const { return weights[m * n_bins + b]; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Builds (or fetches from a process-wide cache) the filterbank for the given
// geometry. Throws BadBandEdges when the band is invalid or a filter row
// would end up with no positive entry.
const MelFilterbank& mel_filterbank(int sample_rate, int frame_length,
                                    std::size_t n_mels, double f_min, double f_max);

struct StftParams {
  int frame_length = 400;  // 25 ms at 16 kHz
  int hop_length = 160;    // 10 ms
  WindowKind window = WindowKind::hann;
};

// Hann-windowed framed power spectrum: frames = 1 + (n - frame)/hop,
// coefficients = frame_length/2 + 1.
FeatureMatrix stft_power(const audio::AudioClip& clip, const StftParams& params);

FeatureMatrix mel_spectrogram(const FeatureMatrix& power, std::size_t n_mels,
                              double f_min, double f_max);

struct MfccParams {
  int n_mfcc = 20;
  int n_mels = 64;
  StftParams stft;
  double f_min = 20.0;
  double f_max = 8000.0;
};

// log(mel + eps) then orthonormal DCT-II along the mel axis, keeping
// coefficients 0..n_mfcc-1. eps = 1e-10.
FeatureMatrix mfcc(const audio::AudioClip& clip, const MfccParams& params);

inline constexpr double kLogFloor = 1e-10;

// Per-coefficient mean followed by per-coefficient standard deviation
// (population) over frames: a fixed-length vector of 2 * coeffs for the
// classical models.
std::vector<double> mfcc_stats(const FeatureMatrix& feat);

// Feature dump formats: a CSV for inspection and a packed little-endian
// binary for training throughput.
void write_feature_csv(const std::string& path, const FeatureMatrix& feat);
FeatureMatrix read_feature_csv(const std::string& path);
void write_feature_bin(const std::string& path, const FeatureMatrix& feat);
FeatureMatrix read_feature_bin(const std::string& path);

}  // namespace synthattr::dsp
