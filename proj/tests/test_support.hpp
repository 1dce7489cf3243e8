#pragma once

// Independent oracles shared by the test suites. Nothing here calls into the
// code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace windnoise::testing {

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// RMS over consecutive non-overlapping blocks (amplitude envelope).
inline std::vector<double> block_rms(std::span<const double> x, std::size_t block) {
  std::vector<double> out;
  for (std::size_t b = 0; b + block <= x.size(); b += block) {
    double s = 0.0;
    for (std::size_t n = b; n < b + block; ++n) s += x[n] * x[n];
    out.push_back(std::sqrt(s / static_cast<double>(block)));
  }
  return out;
}

inline std::vector<double> block_mean(std::span<const double> x, std::size_t block) {
  std::vector<double> out;
  for (std::size_t b = 0; b + block <= x.size(); b += block) {
    double s = 0.0;
    for (std::size_t n = b; n < b + block; ++n) s += x[n];
    out.push_back(s / static_cast<double>(block));
  }
  return out;
}

inline double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

inline double relative_l2_error(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

// Naive O(K^2) DFT of a real sequence, bins 0..K/2.
inline std::vector<std::complex<double>> naive_dft(std::span<const double> x, std::size_t K) {
  std::vector<std::complex<double>> X(K / 2 + 1);
  for (std::size_t k = 0; k <= K / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n % K) / static_cast<double>(K));
    }
    X[k] = acc;
  }
  return X;
}

}  // namespace windnoise::testing
