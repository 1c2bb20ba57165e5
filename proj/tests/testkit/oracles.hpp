#pragma once

// Shared oracles for property tests. Deliberately simple direct-summation
// implementations with no code shared with the production paths, so
// agreement is evidence rather than tautology.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace synthattr::testkit {

struct GradCheckReport {
  double max_rel_error = 0.0;
  double tolerance = 1e-5;
  bool pass = false;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Central differences per coordinate: (f(x+h e_i) - f(x-h e_i)) / 2h with
// h = step * max(1, |x_i|). Throws NonFiniteFunctionValue on NaN/Inf.
std::vector<double> finite_diff_gradient(
    const std::function<double(const std::vector<double>&)>& fn,
    const std::vector<double>& x, double step = 1e-5);

// Relative error with an absolute floor near zero.
double rel_error(double a, double b, double floor_value = 1e-8);

GradCheckReport compare_gradients(const std::vector<double>& analytic,
                                  const std::vector<double>& numeric,
                                  double tolerance = 1e-5,
                                  double floor_value = 1e-8);

// Direct-summation DFT: X[k] = sum_n x[n] exp(-2 pi i n k / N).
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x);
std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x);

// Orthonormal DCT-II by direct summation, coefficients 0..n_out-1.
std::vector<double> naive_dct2(const std::vector<double>& x, std::size_t n_out);

// Triple-loop dilated same-padding cross-correlation.
// x: [Cin][L], w: [Cout][Cin][k], bias: [Cout] -> [Cout][L].
std::vector<std::vector<double>> naive_conv1d(
    const std::vector<std::vector<double>>& x,
    const std::vector<std::vector<std::vector<double>>>& w,
    const std::vector<double>& bias, int dilation);

// Double-loop y = x W^T + b; x: [B][F], w: [O][F].
std::vector<std::vector<double>> naive_linear(
    const std::vector<std::vector<double>>& x,
    const std::vector<std::vector<double>>& w, const std::vector<double>& bias);

// Draws from a 1-D Gaussian mixture (components chosen by weight).
std::vector<double> sample_gaussian_mixture(const std::vector<double>& means,
                                            const std::vector<double>& stds,
                                            const std::vector<double>& weights,
                                            std::size_t count, std::uint64_t seed);

}  // namespace synthattr::testkit
