#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "windnoise/error.hpp"
#include "windnoise/random.hpp"

namespace windnoise {

// Excitation snippets plus the weight beta of the codebook part against
// Gaussian noise: e = (1 - beta) * noise + beta * codebook.
struct ExcitationCodebook {
  std::vector<std::vector<double>> entries;
  double mix_weight = 0.5;
  // The codebook part is assembled from independently drawn entries, one per
  // segment of this many samples (each entry tiled or cropped to fit).
  std::size_t segment_len = 160;

  void validate() const {
    if (!(mix_weight >= 0.0 && mix_weight <= 1.0)) throw ConfigError("excitation mix weight must lie in [0, 1]");
    if (segment_len == 0) throw ConfigError("codebook segment length must be positive");
    if (mix_weight > 0.0 && entries.empty()) throw ConfigError("codebook is empty but mix weight is positive");
    for (const auto& e : entries) {
      if (e.empty()) throw ConfigError("codebook entry is empty");
      double ss = 0.0;
      for (double v : e) ss += v * v;
      if (std::abs(std::sqrt(ss / static_cast<double>(e.size())) - 1.0) > 1e-9) {
        throw ConfigError("codebook entries must have unit RMS");
      }
    }
  }
};

inline void normalize_rms(std::vector<double>& x) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  if (ss <= 0.0) return;
  const double scale = 1.0 / std::sqrt(ss / static_cast<double>(x.size()));
  for (auto& v : x) v *= scale;
}

// Built-in stand-in codebook: 64 one-pole low-pass filtered Gaussian bursts
// of 160 samples each, unit RMS, from a fixed seed.
inline ExcitationCodebook default_codebook() {
  constexpr std::size_t kEntries = 64;
  constexpr std::size_t kLength = 160;
  constexpr double kPole = 0.6;
  ExcitationCodebook cb;
  cb.entries.reserve(kEntries);
  for (std::size_t i = 0; i < kEntries; ++i) {
    auto x = gaussian_noise({0x5EEDC0DEB00Cull, i}, kLength);
    double y = 0.0;
    for (auto& v : x) {
      y = v + kPole * y;
      v = y;
    }
    normalize_rms(x);
    cb.entries.push_back(std::move(x));
  }
  return cb;
}

struct CodebookDraw {
  std::size_t entry = 0;
  double polarity = 1.0;
};

// One draw per segment: entry uniformly at random, polarity +/-1 with equal
// probability. The random polarity keeps two channels that happen to draw
// the same entry uncorrelated on average.
inline std::vector<CodebookDraw> draw_codebook_sequence(const ExcitationCodebook& codebook, std::size_t num_segments,
                                                        RngStream stream) {
  std::vector<CodebookDraw> draws(num_segments);
  if (codebook.entries.empty()) return draws;
  Rng rng(stream);
  for (auto& d : draws) {
    d.entry = static_cast<std::size_t>(rng.index(codebook.entries.size()));
    d.polarity = (rng.next_u64() >> 63) ? -1.0 : 1.0;
  }
  return draws;
}

// Unit-RMS excitation of `length` samples.
inline std::vector<double> generate_excitation(const ExcitationCodebook& codebook, std::size_t length,
                                               RngStream noise_stream, RngStream choice_stream) {
  codebook.validate();
  const double beta = codebook.mix_weight;
  std::vector<double> e = gaussian_noise(noise_stream, length);
  for (auto& v : e) v *= (1.0 - beta);

  if (beta > 0.0) {
    const std::size_t seg = codebook.segment_len;
    const auto draws = draw_codebook_sequence(codebook, (length + seg - 1) / seg, choice_stream);
    for (std::size_t n = 0; n < length; ++n) {
      const auto& d = draws[n / seg];
      const auto& entry = codebook.entries[d.entry];
      e[n] += beta * d.polarity * entry[(n % seg) % entry.size()];
    }
  }
  normalize_rms(e);
  return e;
}

}  // namespace windnoise
