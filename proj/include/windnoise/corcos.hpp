#pragma once

// Corcos turbulent-boundary-layer coherence for a uniform linear array, and
// the per-bin Cholesky factors used as instantaneous mixing matrices.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "windnoise/error.hpp"

namespace windnoise {

using ComplexMatrix = Eigen::MatrixXcd;

struct CorcosParams {
  double mic_spacing_m = 0.004;
  double freefield_speed_mps = 1.8;
  double convective_ratio = 0.8;
  double doa_rad = std::numbers::pi / 2.0;
  double alpha_longitudinal = 0.125;
  double alpha_lateral = 0.7;
  double sample_rate_hz = 16000.0;
  std::size_t fft_length = 2048;
  std::size_t num_channels = 2;

  double convective_speed() const noexcept { return convective_ratio * freefield_speed_mps; }
  std::size_t num_bins() const noexcept { return fft_length / 2 + 1; }

  // omega_k = 2 pi k Fs / K
  double angular_frequency(std::size_t bin) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(bin) * sample_rate_hz / static_cast<double>(fft_length);
  }
  double bin_frequency_hz(std::size_t bin) const noexcept {
    return static_cast<double>(bin) * sample_rate_hz / static_cast<double>(fft_length);
  }

  void validate() const {
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!finite_positive(mic_spacing_m)) throw ConfigError("mic spacing must be positive");
    if (!finite_positive(freefield_speed_mps)) throw ConfigError("wind speed must be positive");
    if (!finite_positive(convective_ratio)) throw ConfigError("convective ratio must be positive");
    if (!std::isfinite(doa_rad) || doa_rad < 0.0 || doa_rad >= 2.0 * std::numbers::pi) {
      throw ConfigError("wind direction must lie in [0, 2 pi)");
    }
    if (!finite_positive(alpha_longitudinal)) throw ConfigError("longitudinal decay rate must be positive");
    if (!finite_positive(alpha_lateral)) throw ConfigError("lateral decay rate must be positive");
    if (!finite_positive(sample_rate_hz)) throw ConfigError("sample rate must be positive");
    if (fft_length < 2 || fft_length % 2 != 0) throw ConfigError("FFT length must be even and at least 2");
    if (num_channels < 1) throw ConfigError("at least one channel is required");
  }
};

// cos/sin of the flow direction, with components within a few ulps of zero
// snapped to exactly zero so axis-aligned directions are exact.
struct DirectionCosines {
  double cos_theta;
  double sin_theta;
};

inline DirectionCosines direction_cosines(double theta) {
  constexpr double snap = 8.0 * std::numeric_limits<double>::epsilon();
  double c = std::cos(theta);
  double s = std::sin(theta);
  if (std::abs(c) < snap) c = 0.0;
  if (std::abs(s) < snap) s = 0.0;
  return {c, s};
}

// alpha(theta) = alpha1 |cos theta| + alpha2 |sin theta|
inline double decay_alpha(double theta_w, double alpha1, double alpha2) {
  if (!std::isfinite(theta_w) || !std::isfinite(alpha1) || !std::isfinite(alpha2)) {
    throw ArgumentError("decay_alpha: non-finite input");
  }
  const auto dc = direction_cosines(theta_w);
  return alpha1 * std::abs(dc.cos_theta) + alpha2 * std::abs(dc.sin_theta);
}

// Which triangle of the coherence matrix an entry (i, j) sits in.
enum class PairOrientation {
  lower,  // i >= j: positive phase
  upper,  // i < j: negative phase (conjugate)
};

// gamma for two microphones separation_indices apart on the array, at bin k.
inline std::complex<double> coherence_pair(const CorcosParams& params, std::size_t bin, std::size_t separation_indices,
                                           PairOrientation orientation) {
  if (bin > params.fft_length / 2) throw ArgumentError("bin index above K/2");
  if (bin == 0 || separation_indices == 0) return {1.0, 0.0};
  const auto dc = direction_cosines(params.doa_rad);
  const double alpha = params.alpha_longitudinal * std::abs(dc.cos_theta) + params.alpha_lateral * std::abs(dc.sin_theta);
  const double x = params.angular_frequency(bin) * params.mic_spacing_m * static_cast<double>(separation_indices) /
                   params.convective_speed();
  const double phase = (orientation == PairOrientation::lower ? 1.0 : -1.0) * x * dc.cos_theta;
  return std::polar(std::exp(-alpha * x), phase);
}

// Gamma(k) for the whole array; time-invariant.
inline ComplexMatrix coherence_matrix(const CorcosParams& params, std::size_t bin) {
  const auto N = static_cast<Eigen::Index>(params.num_channels);
  ComplexMatrix gamma(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const auto sep = static_cast<std::size_t>(i >= j ? i - j : j - i);
      gamma(i, j) = coherence_pair(params, bin, sep, i >= j ? PairOrientation::lower : PairOrientation::upper);
    }
  }
  return gamma;
}

// Single Cholesky attempt A = C^H C with C upper triangular and a real
// positive diagonal. Returns false when a pivot is not safely positive.
inline bool try_cholesky_upper(const ComplexMatrix& a, ComplexMatrix& c) {
  const Eigen::Index n = a.rows();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i).real()));
  const double tol = 16.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;

  c = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) pivot -= std::norm(c(k, j));
    if (!(pivot > tol) || !std::isfinite(pivot)) return false;
    const double d = std::sqrt(pivot);
    c(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      std::complex<double> v = a(j, i);
      for (Eigen::Index k = 0; k < j; ++k) v -= std::conj(c(k, j)) * c(k, i);
      c(j, i) = v / d;
    }
  }
  return true;
}

struct CholeskyResult {
  ComplexMatrix factor;       // upper triangular C
  double regularization = 0;  // epsilon actually used
};

inline constexpr double kFirstRegularization = 1e-12;
inline constexpr double kMaxRegularization = 1e-3;

inline ComplexMatrix regularized(const ComplexMatrix& a, double eps) {
  if (eps == 0.0) return a;
  ComplexMatrix m = a;
  m.diagonal().array() += eps;
  return m / (1.0 + eps);
}

// Factorizes (A + eps I) / (1 + eps) = C^H C. Starts at `regularization`;
// on failure eps grows from 1e-12 by factors of 10 up to 1e-3, after which a
// ModelError is thrown. The renormalization keeps a unit diagonal unit.
inline CholeskyResult cholesky_upper(const ComplexMatrix& a, double regularization = 0.0, std::size_t bin = 0) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ArgumentError("cholesky_upper needs a square non-empty matrix");
  if (!(regularization >= 0.0)) throw ArgumentError("regularization must be nonnegative");
  if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm())) throw ArgumentError("matrix is not Hermitian");

  double eps = regularization;
  CholeskyResult result;
  while (true) {
    if (try_cholesky_upper(regularized(a, eps), result.factor)) {
      result.regularization = eps;
      return result;
    }
    eps = (eps == 0.0) ? kFirstRegularization : eps * 10.0;
    if (eps > kMaxRegularization * (1.0 + 1e-9)) {
      throw ModelError("coherence matrix not positive definite after regularization up to 1e-3", bin);
    }
  }
}

// Per-bin coherence matrices Gamma(k) and their Cholesky factors, k = 0..K/2.
struct CoherenceMatrixSet {
  std::vector<ComplexMatrix> matrices;
  std::vector<ComplexMatrix> cholesky_factors;
  std::vector<double> regularization_used;

  std::size_t num_bins() const noexcept { return matrices.size(); }
  std::size_t num_channels() const noexcept {
    return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows());
  }
  ComplexMatrix regularized_matrix(std::size_t bin) const {
    return regularized(matrices[bin], regularization_used[bin]);
  }
};

inline CoherenceMatrixSet build_matrix_set(const CorcosParams& params) {
  params.validate();
  CoherenceMatrixSet set;
  const std::size_t bins = params.num_bins();
  set.matrices.reserve(bins);
  set.cholesky_factors.reserve(bins);
  set.regularization_used.reserve(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    auto gamma = coherence_matrix(params, k);
    auto chol = cholesky_upper(gamma, 0.0, k);
    set.matrices.push_back(std::move(gamma));
    set.cholesky_factors.push_back(std::move(chol.factor));
    set.regularization_used.push_back(chol.regularization);
  }
  return set;
}

}  // namespace windnoise
