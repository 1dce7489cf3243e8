#pragma once

// Temporal envelope of the wind-noise source: a three-state Markov chain for
// the long-term gain (no wind / low wind / high wind) and a Weibull frame
// energy process for the short-term gain, both smoothed with Hann kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "windnoise/error.hpp"
#include "windnoise/random.hpp"

namespace windnoise {

inline constexpr std::size_t kNumWindStates = 3;

struct MarkovGainModel {
  std::array<double, kNumWindStates> state_gains{0.0, 0.3, 1.0};
  std::array<std::array<double, kNumWindStates>, kNumWindStates> transition_matrix{{
      {0.98, 0.01, 0.01},
      {0.01, 0.98, 0.01},
      {0.01, 0.01, 0.98},
  }};
  std::size_t initial_state = 1;
  std::size_t frame_len_samples = 160;

  void validate() const {
    for (const auto& row : transition_matrix) {
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("transition probabilities must be finite and nonnegative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("transition matrix rows must sum to 1");
    }
    if (!(state_gains[0] >= 0.0)) throw ConfigError("no-wind gain must be nonnegative");
    if (!(state_gains[0] <= state_gains[1] && state_gains[1] <= state_gains[2]) || !std::isfinite(state_gains[2])) {
      throw ConfigError("state gains must be finite and ordered no-wind <= low <= high");
    }
    if (initial_state >= kNumWindStates) throw ConfigError("initial Markov state out of range");
    if (frame_len_samples == 0) throw ConfigError("Markov frame length must be positive");
  }
};

struct WeibullParams {
  double shape = 1.5;
  double scale = 1.0;
  std::size_t frame_len_samples = 160;

  void validate() const {
    if (!(std::isfinite(shape) && shape > 0.0)) throw ConfigError("Weibull shape must be positive");
    if (!(std::isfinite(scale) && scale > 0.0)) throw ConfigError("Weibull scale must be positive");
    if (frame_len_samples == 0) throw ConfigError("Weibull frame length must be positive");
  }
};

struct GainModel {
  MarkovGainModel markov;
  WeibullParams weibull;
  std::size_t longterm_smooth_len = 8001;  // ~500 ms at 16 kHz
  std::size_t shortterm_smooth_len = 481;  // ~30 ms

  void validate() const {
    markov.validate();
    weibull.validate();
    if (longterm_smooth_len < 1 || shortterm_smooth_len < 1) throw ConfigError("smoothing lengths must be at least 1");
    if (longterm_smooth_len % 2 == 0 || shortterm_smooth_len % 2 == 0) throw ConfigError("smoothing lengths must be odd");
    if (longterm_smooth_len < shortterm_smooth_len) {
      throw ConfigError("long-term smoothing must not be shorter than short-term smoothing");
    }
  }
};

// Framewise long-term gain and the Markov state that produced it.
struct LongTermTrack {
  std::vector<double> gain;
  std::vector<std::size_t> state;
};

inline LongTermTrack simulate_long_term_gain(const MarkovGainModel& model, std::size_t num_frames, RngStream stream) {
  model.validate();
  Rng rng(stream);
  LongTermTrack track;
  track.gain.resize(num_frames);
  track.state.resize(num_frames);
  std::size_t s = model.initial_state;
  for (std::size_t f = 0; f < num_frames; ++f) {
    track.state[f] = s;
    track.gain[f] = model.state_gains[s];
    const double u = rng.uniform();
    const auto& row = model.transition_matrix[s];
    double cum = 0.0;
    std::size_t next = kNumWindStates - 1;
    for (std::size_t j = 0; j < kNumWindStates; ++j) {
      cum += row[j];
      if (u < cum) {
        next = j;
        break;
      }
    }
    s = next;
  }
  return track;
}

// Inverse Weibull CDF: lambda (-ln(1 - u))^(1/kappa).
inline double weibull_quantile(double u, double shape, double scale) {
  return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

// Short-term gain = sqrt of a Weibull-distributed frame energy.
inline std::vector<double> simulate_short_term_gain(const WeibullParams& params, std::size_t num_frames, RngStream stream) {
  params.validate();
  Rng rng(stream);
  std::vector<double> gain(num_frames);
  for (auto& g : gain) g = std::sqrt(weibull_quantile(rng.uniform(), params.shape, params.scale));
  return gain;
}

// Symmetric Hann kernel of odd length M with unit area and no zero taps.
inline std::vector<double> hann_smoothing_kernel(std::size_t length) {
  if (length == 0 || length % 2 == 0) throw ConfigError("smoothing kernel length must be odd");
  std::vector<double> h(length);
  double sum = 0.0;
  for (std::size_t m = 0; m < length; ++m) {
    h[m] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(m + 1) / static_cast<double>(length + 1)));
    sum += h[m];
  }
  for (auto& v : h) v /= sum;
  return h;
}

// Expands a framewise gain track to one value per sample (piecewise constant)
// and convolves it with a unit-area Hann kernel of smooth_len taps. Samples
// outside the track take the nearest edge value, so constants are preserved
// and the output stays within [min, max] of the input.
//
// The convolution runs frame by frame over kernel prefix sums, so the cost per
// output sample is about smooth_len / frame_len instead of smooth_len.
inline std::vector<double> smooth_gain(std::span<const double> framewise_gain, std::size_t frame_len,
                                       std::size_t smooth_len) {
  if (framewise_gain.empty()) throw ArgumentError("smooth_gain needs a non-empty track");
  if (frame_len == 0) throw ArgumentError("frame length must be positive");
  const auto h = hann_smoothing_kernel(smooth_len);
  std::vector<double> cum(smooth_len + 1, 0.0);
  for (std::size_t m = 0; m < smooth_len; ++m) cum[m + 1] = cum[m] + h[m];

  const auto num_frames = static_cast<std::ptrdiff_t>(framewise_gain.size());
  const auto F = static_cast<std::ptrdiff_t>(frame_len);
  const auto half = static_cast<std::ptrdiff_t>(smooth_len / 2);
  auto floor_div = [](std::ptrdiff_t a, std::ptrdiff_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  auto value = [&](std::ptrdiff_t f) {
    return framewise_gain[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(f, 0, num_frames - 1))];
  };

  std::vector<double> out(framewise_gain.size() * frame_len);
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
    const std::ptrdiff_t lo = n - half;  // kernel tap m covers sample lo + m
    const std::ptrdiff_t hi = n + half;
    double acc = 0.0;
    for (std::ptrdiff_t f = floor_div(lo, F); f <= floor_div(hi, F); ++f) {
      const std::ptrdiff_t s0 = std::max(f * F, lo);
      const std::ptrdiff_t s1 = std::min(f * F + F - 1, hi);
      acc += value(f) * (cum[static_cast<std::size_t>(s1 - lo + 1)] - cum[static_cast<std::size_t>(s0 - lo)]);
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

}  // namespace windnoise
