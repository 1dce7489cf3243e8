#pragma once

// Welch-averaged complex coherence estimation and comparison against the
// Corcos model through the normalized mean squared error
//   nMSE_ij = sum_k |g^_ij(k) - g_ij(k)|^2 / sum_k |g_ij(k)|^2,  k = 0..K/2-1.

#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "windnoise/buffer.hpp"
#include "windnoise/corcos.hpp"
#include "windnoise/error.hpp"
#include "windnoise/stft.hpp"
#include "windnoise/window.hpp"

namespace windnoise {

struct CoherenceEstimate {
  std::size_t num_channels = 0;
  std::size_t fft_length = 0;
  double sample_rate_hz = 0.0;
  std::size_t num_frames_averaged = 0;
  WindowSpec window;
  // Indexed ((i * N) + j) * bins + k. NaN marks an undefined bin.
  std::vector<std::complex<double>> gamma;

  static CoherenceEstimate empty(std::size_t num_channels, std::size_t fft_length, double sample_rate_hz) {
    CoherenceEstimate e;
    e.num_channels = num_channels;
    e.fft_length = fft_length;
    e.sample_rate_hz = sample_rate_hz;
    e.window = hann_quarter_hop(fft_length);
    e.gamma.assign(num_channels * num_channels * e.num_bins(), missing());
    return e;
  }

  static std::complex<double> missing() {
    return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }

  std::size_t num_bins() const noexcept { return fft_length / 2 + 1; }

  std::complex<double>& raw(std::size_t i, std::size_t j, std::size_t k) {
    return gamma[(i * num_channels + j) * num_bins() + k];
  }
  const std::complex<double>& raw(std::size_t i, std::size_t j, std::size_t k) const {
    return gamma[(i * num_channels + j) * num_bins() + k];
  }

  std::optional<std::complex<double>> at(std::size_t i, std::size_t j, std::size_t k) const {
    const auto v = raw(i, j, k);
    if (std::isnan(v.real())) return std::nullopt;
    return v;
  }
};

inline constexpr std::size_t kMinFramesForCoherence = 8;

// g^_ij(k) = sum_l V_i V_j^* / sqrt(sum_l |V_i|^2 sum_l |V_j|^2)
inline CoherenceEstimate estimate_coherence(const MultichannelBuffer& buffer, const WindowSpec& window,
                                            std::size_t fft_length) {
  window.validate();
  if (buffer.channels.empty() || buffer.num_samples() == 0) throw ArgumentError("coherence of an empty buffer");
  buffer.validate();
  const std::size_t N = buffer.num_channels();
  const std::size_t frames = stft_frame_count(buffer.num_samples(), window);
  if (frames < kMinFramesForCoherence) throw ArgumentError("coherence estimation needs at least 8 STFT frames");

  FrameAnalyzer analyzer(window, fft_length);
  const std::size_t bins = analyzer.num_bins();
  std::vector<std::vector<std::complex<double>>> spectra(N, std::vector<std::complex<double>>(bins));
  // Upper triangle (i <= j) of the cross-spectral matrix per bin.
  std::vector<std::complex<double>> cross(N * N * bins, 0.0);

  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t c = 0; c < N; ++c) analyzer.analyze(buffer.channels[c], l, spectra[c]);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = i; j < N; ++j) {
        auto* acc = &cross[(i * N + j) * bins];
        const auto& vi = spectra[i];
        const auto& vj = spectra[j];
        for (std::size_t k = 0; k < bins; ++k) acc[k] += vi[k] * std::conj(vj[k]);
      }
    }
  }

  auto est = CoherenceEstimate::empty(N, fft_length, buffer.sample_rate_hz);
  est.window = window;
  est.num_frames_averaged = frames;
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      const double pii = cross[(i * N + i) * bins + k].real();
      if (pii > 0.0) est.raw(i, i, k) = 1.0;
      for (std::size_t j = i + 1; j < N; ++j) {
        const double pjj = cross[(j * N + j) * bins + k].real();
        if (pii > 0.0 && pjj > 0.0) {
          const auto g = cross[(i * N + j) * bins + k] / std::sqrt(pii * pjj);
          est.raw(i, j, k) = g;
          est.raw(j, i, k) = std::conj(g);
        }
      }
    }
  }
  return est;
}

// Highest bin index with k * Fs / K <= band_limit_hz.
inline std::size_t last_bin_within(double band_limit_hz, std::size_t fft_length, double sample_rate_hz) {
  const double k = std::floor(band_limit_hz * static_cast<double>(fft_length) / sample_rate_hz + 1e-9);
  if (k < 0.0) return 0;
  return std::min(static_cast<std::size_t>(k), fft_length / 2);
}

inline std::complex<double> model_coherence(const CorcosParams& params, std::size_t i, std::size_t j, std::size_t k) {
  return coherence_pair(params, k, i >= j ? i - j : j - i, i >= j ? PairOrientation::lower : PairOrientation::upper);
}

struct NmseResult {
  double value = 0.0;
  std::size_t bins_used = 0;
  std::size_t bins_missing = 0;  // undefined estimate bins left out of both sums
};

inline void check_grid(const CoherenceEstimate& estimate, const CorcosParams& params) {
  if (estimate.fft_length != params.fft_length ||
      std::abs(estimate.sample_rate_hz - params.sample_rate_hz) > 1e-9 * params.sample_rate_hz) {
    throw ArgumentError("coherence estimate and model use different frequency grids");
  }
}

inline NmseResult nmse(const CoherenceEstimate& estimate, const CorcosParams& params, std::size_t i, std::size_t j,
                       std::optional<double> band_limit_hz = std::nullopt) {
  check_grid(estimate, params);
  if (i >= estimate.num_channels || j >= estimate.num_channels) throw ArgumentError("pair index out of range");
  std::size_t k_last = params.fft_length / 2 - 1;
  if (band_limit_hz) k_last = std::min(k_last, last_bin_within(*band_limit_hz, params.fft_length, params.sample_rate_hz));

  NmseResult r;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k <= k_last; ++k) {
    const auto est = estimate.at(i, j, k);
    if (!est) {
      ++r.bins_missing;
      continue;
    }
    const auto model = model_coherence(params, i, j, k);
    num += std::norm(*est - model);
    den += std::norm(model);
    ++r.bins_used;
  }
  r.value = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
  return r;
}

struct CoherenceReportRow {
  std::size_t i = 0;
  std::size_t j = 0;
  double frequency_hz = 0.0;
  std::optional<std::complex<double>> estimate;
  std::complex<double> model;
};

struct PairSummary {
  std::size_t i = 0;
  std::size_t j = 0;
  NmseResult nmse;
};

struct CoherenceReport {
  double band_limit_hz = 1000.0;
  std::vector<CoherenceReportRow> rows;
  std::vector<PairSummary> summary;
};

// Rows for every pair i < j and every bin up to band_limit_hz, plus the
// band-limited nMSE of each pair.
inline CoherenceReport coherence_report(const CoherenceEstimate& estimate, const CorcosParams& params,
                                        double band_limit_hz = 1000.0) {
  check_grid(estimate, params);
  CoherenceReport report;
  report.band_limit_hz = band_limit_hz;
  const std::size_t k_last = last_bin_within(band_limit_hz, params.fft_length, params.sample_rate_hz);
  for (std::size_t i = 0; i < estimate.num_channels; ++i) {
    for (std::size_t j = i + 1; j < estimate.num_channels; ++j) {
      for (std::size_t k = 0; k <= k_last; ++k) {
        report.rows.push_back({i, j, params.bin_frequency_hz(k), estimate.at(i, j, k), model_coherence(params, i, j, k)});
      }
      report.summary.push_back({i, j, nmse(estimate, params, i, j, band_limit_hz)});
    }
  }
  return report;
}

// CSV writers. Microphones are numbered from 1; undefined estimates are
// written as empty fields.
inline void write_report_csv(const CoherenceReport& report, std::ostream& out) {
  out << "mic_i,mic_j,frequency_hz,re_estimate,im_estimate,re_model,im_model\n";
  out << std::setprecision(17);
  for (const auto& r : report.rows) {
    out << r.i + 1 << ',' << r.j + 1 << ',' << r.frequency_hz << ',';
    if (r.estimate) {
      out << r.estimate->real() << ',' << r.estimate->imag();
    } else {
      out << ',';
    }
    out << ',' << r.model.real() << ',' << r.model.imag() << '\n';
  }
}

inline void write_summary_csv(const CoherenceReport& report, std::ostream& out) {
  out << "mic_i,mic_j,nmse,bins_used,bins_missing,band_limit_hz\n";
  out << std::setprecision(17);
  for (const auto& s : report.summary) {
    out << s.i + 1 << ',' << s.j + 1 << ',' << s.nmse.value << ',' << s.nmse.bins_used << ',' << s.nmse.bins_missing
        << ',' << report.band_limit_hz << '\n';
  }
}

}  // namespace windnoise
