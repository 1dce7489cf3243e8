#pragma once

// One channel of the source-filter wind model:
//   excitation -> x smoothed long-term gain -> x smoothed short-term gain -> 1/A(z)

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "windnoise/allpole.hpp"
#include "windnoise/error.hpp"
#include "windnoise/excitation.hpp"
#include "windnoise/gain_model.hpp"
#include "windnoise/random.hpp"

namespace windnoise {

struct ChannelStreams {
  RngStream long_term;
  RngStream excitation_noise;
  RngStream codebook_choice;
  RngStream short_term;
};

// Stream schedule: 0 = shared long-term chain; 1 + 3c + {0, 1, 2} = channel
// c's excitation noise, codebook choice and short-term gain.
inline ChannelStreams channel_streams(std::uint64_t master_seed, std::size_t channel) {
  const std::uint64_t base = 1 + 3 * static_cast<std::uint64_t>(channel);
  return {{master_seed, 0}, {master_seed, base}, {master_seed, base + 1}, {master_seed, base + 2}};
}

inline std::size_t duration_to_samples(double duration_s, double sample_rate_hz) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("duration must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

inline std::size_t frames_covering(std::size_t samples, std::size_t frame_len) {
  return (samples + frame_len - 1) / frame_len;
}

inline std::vector<double> generate_single_channel(const GainModel& gain_model, const ExcitationCodebook& codebook,
                                                   std::span<const double> ar_coeffs, double duration_s,
                                                   double sample_rate_hz, const ChannelStreams& streams,
                                                   const LongTermTrack* shared_long_term = nullptr) {
  gain_model.validate();
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!is_stable_allpole(ar_coeffs)) throw ConfigError("AR coefficients describe an unstable filter");
  const std::size_t length = duration_to_samples(duration_s, sample_rate_hz);

  const std::size_t lt_frames = frames_covering(length, gain_model.markov.frame_len_samples);
  LongTermTrack own;
  if (shared_long_term == nullptr) {
    own = simulate_long_term_gain(gain_model.markov, lt_frames, streams.long_term);
    shared_long_term = &own;
  } else if (shared_long_term->gain.size() != lt_frames) {
    throw ArgumentError("shared long-term track does not match the Markov frame grid");
  }

  const auto lt = smooth_gain(shared_long_term->gain, gain_model.markov.frame_len_samples, gain_model.longterm_smooth_len);
  const auto st_frames = simulate_short_term_gain(gain_model.weibull, frames_covering(length, gain_model.weibull.frame_len_samples),
                                                  streams.short_term);
  const auto st = smooth_gain(st_frames, gain_model.weibull.frame_len_samples, gain_model.shortterm_smooth_len);

  auto x = generate_excitation(codebook, length, streams.excitation_noise, streams.codebook_choice);
  for (std::size_t n = 0; n < length; ++n) x[n] *= lt[n] * st[n];
  return allpole_filter(x, ar_coeffs);
}

}  // namespace windnoise
