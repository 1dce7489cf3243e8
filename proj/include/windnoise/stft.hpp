#pragma once

// Short-time Fourier transform with weighted overlap-add resynthesis.
//
// Framing: the signal is padded with (L - hop) zeros at both ends, so every
// original sample is covered by exactly L / hop frames. Frame l spans padded
// samples [l * hop, l * hop + L), i.e. original samples starting at
// l * hop - (L - hop). The tail is further zero-padded to fill the last frame,
// and istft() truncates back to the analyzed length. With full coverage the
// squared-window overlap sum is the same constant everywhere, which makes
// istft(stft(x)) == x up to rounding over the whole signal, edges included.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "windnoise/buffer.hpp"
#include "windnoise/error.hpp"
#include "windnoise/window.hpp"

namespace windnoise {

// Real-input FFT of fixed even length n returning the n/2 + 1 one-sided bins.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw ConfigError("FFT length must be even and at least 2");
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t num_bins() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    fft_.fwd(out.data(), in.data(), static_cast<Eigen::Index>(n_));
  }

  // Scaled inverse (includes the 1/n factor).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    // kissfft's real inverse reads its input through a non-const pointer.
    spectrum_.assign(in.begin(), in.end());
    fft_.inv(out.data(), spectrum_.data(), static_cast<Eigen::Index>(n_));
  }

 private:
  std::size_t n_;
  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> spectrum_;
};

// One-sided STFT coefficients indexed (channel, frame, bin).
struct SpectralFrames {
  std::size_t num_channels = 0;
  std::size_t num_frames = 0;
  std::size_t fft_length = 0;
  std::size_t signal_length = 0;
  double sample_rate_hz = 0.0;
  WindowSpec window;
  std::vector<std::complex<double>> coefficients;

  std::size_t num_bins() const noexcept { return fft_length / 2 + 1; }
  std::size_t leading_pad() const noexcept { return window.length_samples - window.hop_samples; }

  std::complex<double>& at(std::size_t channel, std::size_t frame, std::size_t bin) {
    return coefficients[(channel * num_frames + frame) * num_bins() + bin];
  }
  const std::complex<double>& at(std::size_t channel, std::size_t frame, std::size_t bin) const {
    return coefficients[(channel * num_frames + frame) * num_bins() + bin];
  }

  std::span<std::complex<double>> frame(std::size_t channel, std::size_t l) {
    return {coefficients.data() + (channel * num_frames + l) * num_bins(), num_bins()};
  }
  std::span<const std::complex<double>> frame(std::size_t channel, std::size_t l) const {
    return {coefficients.data() + (channel * num_frames + l) * num_bins(), num_bins()};
  }
};

// Number of frames produced for a signal of `signal_length` samples.
inline std::size_t stft_frame_count(std::size_t signal_length, const WindowSpec& spec) {
  const std::size_t L = spec.length_samples;
  const std::size_t hop = spec.hop_samples;
  const std::size_t padded = signal_length + 2 * (L - hop);
  if (padded <= L) return 1;
  return (padded - L + hop - 1) / hop + 1;
}

// Computes single frames of the padded framing described above. Used by
// stft() and by streaming consumers that do not keep all frames in memory.
class FrameAnalyzer {
 public:
  FrameAnalyzer(const WindowSpec& spec, std::size_t fft_length)
      : spec_(spec), window_(make_window(spec)), fft_(fft_length), segment_(fft_length, 0.0) {
    if (fft_length < spec.length_samples) throw ConfigError("FFT length shorter than the window");
  }

  std::size_t num_bins() const noexcept { return fft_.num_bins(); }
  std::size_t fft_length() const noexcept { return fft_.size(); }
  const WindowSpec& window() const noexcept { return spec_; }

  void analyze(std::span<const double> x, std::size_t frame, std::span<std::complex<double>> out) {
    const std::ptrdiff_t start = frame_start(frame);
    const auto M = static_cast<std::ptrdiff_t>(x.size());
    for (std::size_t n = 0; n < spec_.length_samples; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      segment_[n] = (idx >= 0 && idx < M) ? window_[n] * x[static_cast<std::size_t>(idx)] : 0.0;
    }
    fft_.forward(segment_, out);
  }

  std::ptrdiff_t frame_start(std::size_t frame) const noexcept {
    return static_cast<std::ptrdiff_t>(frame * spec_.hop_samples) -
           static_cast<std::ptrdiff_t>(spec_.length_samples - spec_.hop_samples);
  }

 private:
  WindowSpec spec_;
  std::vector<double> window_;
  RealFft fft_;
  std::vector<double> segment_;
};

// Weighted overlap-add: synthesis window = analysis window, output divided by
// the constant squared-window overlap sum.
class FrameSynthesizer {
 public:
  FrameSynthesizer(const WindowSpec& spec, std::size_t fft_length)
      : spec_(spec), window_(make_window(spec)), norm_(wola_normalization(spec)), fft_(fft_length),
        segment_(fft_length, 0.0) {
    if (fft_length < spec.length_samples) throw ConfigError("FFT length shorter than the window");
  }

  void accumulate(std::span<const std::complex<double>> spectrum, std::size_t frame, std::span<double> y) {
    fft_.inverse(spectrum, segment_);
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(frame * spec_.hop_samples) -
                                 static_cast<std::ptrdiff_t>(spec_.length_samples - spec_.hop_samples);
    const auto M = static_cast<std::ptrdiff_t>(y.size());
    for (std::size_t n = 0; n < spec_.length_samples; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      if (idx >= 0 && idx < M) y[static_cast<std::size_t>(idx)] += window_[n] * segment_[n];
    }
  }

  void finalize(std::span<double> y) const {
    for (auto& v : y) v /= norm_;
  }

 private:
  WindowSpec spec_;
  std::vector<double> window_;
  double norm_;
  RealFft fft_;
  std::vector<double> segment_;
};

inline SpectralFrames stft(const MultichannelBuffer& buffer, const WindowSpec& spec, std::size_t fft_length) {
  spec.validate();
  if (buffer.channels.empty() || buffer.num_samples() == 0) throw ArgumentError("stft of an empty buffer");
  buffer.validate();

  FrameAnalyzer analyzer(spec, fft_length);
  SpectralFrames out;
  out.num_channels = buffer.num_channels();
  out.num_frames = stft_frame_count(buffer.num_samples(), spec);
  out.fft_length = fft_length;
  out.signal_length = buffer.num_samples();
  out.sample_rate_hz = buffer.sample_rate_hz;
  out.window = spec;
  out.coefficients.assign(out.num_channels * out.num_frames * out.num_bins(), {});

  for (std::size_t c = 0; c < out.num_channels; ++c) {
    for (std::size_t l = 0; l < out.num_frames; ++l) analyzer.analyze(buffer.channels[c], l, out.frame(c, l));
  }
  return out;
}

inline MultichannelBuffer istft(const SpectralFrames& frames) {
  FrameSynthesizer synth(frames.window, frames.fft_length);
  MultichannelBuffer out;
  out.sample_rate_hz = frames.sample_rate_hz;
  out.channels.assign(frames.num_channels, std::vector<double>(frames.signal_length, 0.0));
  for (std::size_t c = 0; c < frames.num_channels; ++c) {
    for (std::size_t l = 0; l < frames.num_frames; ++l) synth.accumulate(frames.frame(c, l), l, out.channels[c]);
    synth.finalize(out.channels[c]);
  }
  return out;
}

}  // namespace windnoise
