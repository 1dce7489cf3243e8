#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "windnoise/error.hpp"

namespace windnoise {

enum class WindowKind { hann };

struct WindowSpec {
  std::size_t length_samples = 2048;
  std::size_t hop_samples = 512;
  WindowKind kind = WindowKind::hann;

  void validate() const {
    if (length_samples < 2) throw ConfigError("window length must be at least 2");
    if (hop_samples == 0) throw ConfigError("window hop must be positive");
    if (length_samples % hop_samples != 0) throw ConfigError("window hop must divide window length");
  }
};

// 75% overlap Hann analysis window of the given length.
inline WindowSpec hann_quarter_hop(std::size_t length) { return {length, length / 4, WindowKind::hann}; }

// Periodic (DFT-even) Hann: w[n] = 0.5 (1 - cos(2 pi n / L)).
inline std::vector<double> make_window(const WindowSpec& spec) {
  spec.validate();
  const auto L = spec.length_samples;
  std::vector<double> w(L);
  for (std::size_t n = 0; n < L; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(L)));
  }
  return w;
}

// Sum of the squared window over all hop shifts, one value per phase r in [0, hop).
inline std::vector<double> squared_overlap_sum(const WindowSpec& spec) {
  const auto w = make_window(spec);
  std::vector<double> sum(spec.hop_samples, 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) sum[n % spec.hop_samples] += w[n] * w[n];
  return sum;
}

// Constant squared-window overlap sum for weighted overlap-add, or ConfigError
// if the window/hop pair does not give one.
inline double wola_normalization(const WindowSpec& spec) {
  const auto sum = squared_overlap_sum(spec);
  const double ref = sum.front();
  for (double s : sum) {
    if (!(ref > 0.0) || std::abs(s - ref) > 1e-10 * ref) {
      throw ConfigError("window/hop pair does not satisfy the squared-window constant-overlap-add condition");
    }
  }
  return ref;
}

}  // namespace windnoise
