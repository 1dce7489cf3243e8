#pragma once

// Multichannel wind-noise generation: N source-filter channels sharing one
// long-term envelope, then per-bin instantaneous mixing with the Cholesky
// factors of the Corcos coherence matrices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <vector>

#include "windnoise/allpole.hpp"
#include "windnoise/buffer.hpp"
#include "windnoise/corcos.hpp"
#include "windnoise/error.hpp"
#include "windnoise/excitation.hpp"
#include "windnoise/gain_model.hpp"
#include "windnoise/single_channel.hpp"
#include "windnoise/stft.hpp"
#include "windnoise/window.hpp"

namespace windnoise {

struct SimulationConfig {
  CorcosParams corcos;
  WindowSpec window = hann_quarter_hop(2048);
  GainModel gain_model;
  ExcitationCodebook codebook = default_codebook();
  std::vector<double> ar_coeffs = default_ar_coefficients();
  double duration_s = 600.0;
  std::uint64_t master_seed = 1;

  std::size_t num_samples() const { return duration_to_samples(duration_s, corcos.sample_rate_hz); }

  void validate() const {
    corcos.validate();
    window.validate();
    gain_model.validate();
    codebook.validate();
    if (window.length_samples > corcos.fft_length) throw ConfigError("window longer than the FFT length");
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("duration must be positive");
    if (static_cast<double>(num_samples()) < 2.0 * static_cast<double>(corcos.fft_length)) {
      throw ConfigError("duration must cover at least two FFT lengths");
    }
    if (!is_stable_allpole(ar_coeffs)) throw ConfigError("AR coefficients describe an unstable filter");
  }
};

inline MultichannelBuffer generate_uncorrelated_channels(const SimulationConfig& config) {
  config.validate();
  const double fs = config.corcos.sample_rate_hz;
  const std::size_t length = config.num_samples();
  const auto& gm = config.gain_model;

  const auto shared = simulate_long_term_gain(gm.markov, frames_covering(length, gm.markov.frame_len_samples),
                                              channel_streams(config.master_seed, 0).long_term);

  // Channels only read shared data and own their streams, so the result does
  // not depend on scheduling.
  std::vector<std::future<std::vector<double>>> jobs;
  for (std::size_t c = 0; c < config.corcos.num_channels; ++c) {
    jobs.push_back(std::async(std::launch::async, [&config, &shared, fs, c] {
      return generate_single_channel(config.gain_model, config.codebook, config.ar_coeffs, config.duration_s, fs,
                                     channel_streams(config.master_seed, c), &shared);
    }));
  }
  MultichannelBuffer out;
  out.sample_rate_hz = fs;
  for (auto& j : jobs) out.channels.push_back(j.get());
  return out;
}

// V~(l, k) = C^H(k) V(l, k) per frame and bin, then inverse STFT.
inline MultichannelBuffer apply_spatial_mixing(const MultichannelBuffer& buffer, const CoherenceMatrixSet& matrix_set,
                                               const WindowSpec& window) {
  buffer.validate();
  const std::size_t N = buffer.num_channels();
  if (matrix_set.num_channels() != N) throw ArgumentError("matrix set dimension does not match channel count");
  if (matrix_set.num_bins() < 2) throw ArgumentError("matrix set has too few bins");
  const std::size_t K = 2 * (matrix_set.num_bins() - 1);

  window.validate();
  FrameAnalyzer analyzer(window, K);
  FrameSynthesizer synth(window, K);
  const std::size_t bins = analyzer.num_bins();
  const std::size_t num_frames = stft_frame_count(buffer.num_samples(), window);

  MultichannelBuffer out;
  out.sample_rate_hz = buffer.sample_rate_hz;
  out.channels.assign(N, std::vector<double>(buffer.num_samples(), 0.0));

  // Frames are processed one at a time; only the output signals are kept.
  std::vector<std::vector<std::complex<double>>> in(N, std::vector<std::complex<double>>(bins));
  std::vector<std::complex<double>> mixed(bins);
  for (std::size_t l = 0; l < num_frames; ++l) {
    for (std::size_t c = 0; c < N; ++c) analyzer.analyze(buffer.channels[c], l, in[c]);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < bins; ++k) {
        const auto& C = matrix_set.cholesky_factors[k];
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          acc += std::conj(C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) * in[j][k];
        }
        mixed[k] = acc;
      }
      synth.accumulate(mixed, l, out.channels[i]);
    }
  }
  for (auto& ch : out.channels) synth.finalize(ch);
  return out;
}

struct GeneratedSignals {
  MultichannelBuffer signals;
  double normalization_gain = 1.0;  // applied to every channel
  double max_regularization = 0.0;  // largest epsilon over all bins
};

inline constexpr double kOutputPeak = 0.9;

inline GeneratedSignals generate(const SimulationConfig& config) {
  config.validate();
  const auto matrix_set = build_matrix_set(config.corcos);
  auto mixed = apply_spatial_mixing(generate_uncorrelated_channels(config), matrix_set, config.window);

  double peak = 0.0;
  for (const auto& ch : mixed.channels) {
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  GeneratedSignals out;
  out.normalization_gain = peak > 0.0 ? kOutputPeak / peak : 1.0;
  for (auto& ch : mixed.channels) {
    for (auto& v : ch) v *= out.normalization_gain;
  }
  out.signals = std::move(mixed);
  out.max_regularization = *std::max_element(matrix_set.regularization_used.begin(), matrix_set.regularization_used.end());
  return out;
}

}  // namespace windnoise
