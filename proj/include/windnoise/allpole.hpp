#pragma once

// All-pole (AR) filtering and autoregressive model fitting.
//
// SIGN CONVENTION: coefficients a_1..a_p describe
//     A(z) = 1 + a_1 z^-1 + ... + a_p z^-p
// and the filter 1 / A(z) computes
//     y[n] = x[n] - sum_{m=1..p} a_m y[n - m].
// So a_1 = -0.5 is the one-pole low-pass with impulse response 0.5^n.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/Polynomials>

#include "windnoise/error.hpp"

namespace windnoise {

// Largest pole magnitude of 1 / A(z); 0 for the identity filter.
inline double max_pole_magnitude(std::span<const double> a) {
  std::size_t p = a.size();
  while (p > 0 && a[p - 1] == 0.0) --p;  // trailing zeros are poles at the origin
  if (p == 0) return 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    if (!std::isfinite(a[i])) throw ConfigError("AR coefficients must be finite");
  }
  if (p == 1) return std::abs(a[0]);
  // z^p A(z) with coefficients in ascending degree.
  Eigen::VectorXd poly(p + 1);
  for (std::size_t i = 0; i < p; ++i) poly[static_cast<Eigen::Index>(i)] = a[p - 1 - i];
  poly[static_cast<Eigen::Index>(p)] = 1.0;
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(poly);
  double r = 0.0;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) r = std::max(r, std::abs(solver.roots()[i]));
  return r;
}

inline bool is_stable_allpole(std::span<const double> a) { return max_pole_magnitude(a) < 1.0; }

// Causal IIR 1 / A(z) with zero initial state. Throws ConfigError for unstable A(z).
inline std::vector<double> allpole_filter(std::span<const double> x, std::span<const double> a) {
  if (!is_stable_allpole(a)) throw ConfigError("all-pole filter is unstable (pole on or outside the unit circle)");
  const std::size_t p = a.size();
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    const std::size_t taps = std::min(p, n);
    for (std::size_t m = 1; m <= taps; ++m) acc -= a[m - 1] * y[n - m];
    y[n] = acc;
  }
  return y;
}

struct ArFit {
  std::vector<double> coefficients;  // a_1..a_p
  double prediction_error = 0.0;     // final Levinson error power (AR gain)
};

// Levinson-Durbin recursion on autocorrelation r[0..p].
inline ArFit levinson_durbin(std::span<const double> r, std::size_t order) {
  if (r.size() < order + 1) throw ArgumentError("autocorrelation too short for requested order");
  if (!(r[0] > 0.0)) throw ArgumentError("autocorrelation lag 0 must be positive");
  std::vector<double> a(order, 0.0);
  std::vector<double> prev(order, 0.0);
  double err = r[0];
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j - 1] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j - 1] = prev[j - 1] + k * prev[i - j - 1];
    a[i - 1] = k;
    err *= (1.0 - k * k);
    if (!(err > 0.0)) throw ConfigError("Levinson-Durbin recursion lost positive definiteness");
  }
  return {std::move(a), err};
}

// Power spectrum of the AR model gain / |A(e^{j w})|^2 at frequency f.
inline double ar_power_spectrum(std::span<const double> a, double gain, double f_hz, double sample_rate_hz) {
  const double w = 2.0 * std::numbers::pi * f_hz / sample_rate_hz;
  std::complex<double> A = 1.0;
  for (std::size_t m = 1; m <= a.size(); ++m) A += a[m - 1] * std::polar(1.0, -w * static_cast<double>(m));
  return gain / std::norm(A);
}

// Flat up to knee_hz, then falling at slope_db_per_octave.
struct PowerLawTarget {
  double knee_hz = 400.0;
  double slope_db_per_octave = 24.0;

  double operator()(double f_hz) const {
    if (f_hz <= knee_hz) return 1.0;
    const double exponent = slope_db_per_octave / (10.0 * std::log10(2.0));
    return std::pow(f_hz / knee_hz, -exponent);
  }
};

// Autocorrelation lags 0..max_lag of a one-sided target PSD sampled on a
// grid of `grid_size` points (inverse real FFT).
template <typename Psd>
std::vector<double> autocorrelation_from_psd(const Psd& psd, double sample_rate_hz, std::size_t max_lag,
                                             std::size_t grid_size = 1 << 16) {
  if (grid_size % 2 != 0 || grid_size <= 2 * max_lag) throw ArgumentError("PSD grid too small");
  std::vector<std::complex<double>> spectrum(grid_size / 2 + 1);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    spectrum[k] = psd(static_cast<double>(k) * sample_rate_hz / static_cast<double>(grid_size));
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> r(grid_size);
  fft.inv(r.data(), spectrum.data(), static_cast<Eigen::Index>(grid_size));
  r.resize(max_lag + 1);
  return r;
}

template <typename Psd>
ArFit fit_ar_to_psd(const Psd& psd, std::size_t order, double sample_rate_hz) {
  const auto r = autocorrelation_from_psd(psd, sample_rate_hz, order);
  return levinson_durbin(r, order);
}

inline constexpr std::size_t kDefaultArOrder = 5;

// AR(5) stand-in for trained wind-noise coefficients: fit to PowerLawTarget{}
// at 16 kHz.
inline const std::vector<double>& default_ar_coefficients() {
  static const std::vector<double> coeffs = fit_ar_to_psd(PowerLawTarget{}, kDefaultArOrder, 16000.0).coefficients;
  return coeffs;
}

}  // namespace windnoise
