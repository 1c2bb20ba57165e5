#include "synthattr/dsp/fft.hpp"

#include <cmath>
#include <cstddef>

namespace synthattr::dsp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& x,
                                      bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (is_pow2(n)) {
    auto a = x;
    fft_pow2(a, inverse);
    return a;
  }
  // Bluestein: express the DFT as a convolution with a chirp. Exponent n^2/2
  // is evaluated mod 2N to keep the angle exact for large n.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t sq = (k * k) % (2 * n);
    const double ang = sign * kTwoPi * static_cast<double>(sq) / (2.0 * static_cast<double>(n));
    chirp[k] = {std::cos(ang), std::sin(ang)};
  }
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  if (inverse) {
    const double invn = 1.0 / static_cast<double>(n);
    for (auto& z : out) z *= invn;
  }
  return out;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  std::vector<std::complex<double>> cx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cx[i] = {x[i], 0.0};
  auto full = fft(cx, false);
  full.resize(x.size() / 2 + 1);
  return full;
}

std::vector<double> fft_convolve(const std::vector<double>& x,
                                 const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t m = next_pow2(out_len);
  std::vector<std::complex<double>> fx(m), fh(m);
  for (std::size_t i = 0; i < x.size(); ++i) fx[i] = {x[i], 0.0};
  for (std::size_t i = 0; i < h.size(); ++i) fh[i] = {h[i], 0.0};
  fft_pow2(fx, false);
  fft_pow2(fh, false);
  for (std::size_t i = 0; i < m; ++i) fx[i] *= fh[i];
  fft_pow2(fx, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fx[i].real();
  return out;
}

}  // namespace synthattr::dsp
