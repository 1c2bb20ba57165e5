#pragma once

#include <complex>
#include <vector>

namespace synthattr::dsp {

// In-place complex FFT, size must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse);

// Complex DFT of arbitrary size (Bluestein when the size is not a power of
// two). Forward transform convention: X[k] = sum_n x[n] exp(-2*pi*i*n*k/N).
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      bool inverse = false);

// Real-input DFT; returns bins 0..N/2 (N/2+1 values).
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

// Full linear convolution of two real signals, length nx + nh - 1.
std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h);

}  // namespace synthattr::dsp
