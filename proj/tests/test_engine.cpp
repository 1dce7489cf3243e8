#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "windnoise/coherence_analysis.hpp"
#include "windnoise/engine.hpp"

using namespace windnoise;
using Catch::Matchers::WithinAbs;

namespace {

SimulationConfig short_config(std::size_t channels, double duration_s, std::uint64_t seed = 3) {
  SimulationConfig c;
  c.corcos.num_channels = channels;
  c.duration_s = duration_s;
  c.master_seed = seed;
  return c;
}

MultichannelBuffer noise_buffer(std::size_t channels, std::size_t length, std::uint64_t seed) {
  MultichannelBuffer b;
  for (std::size_t c = 0; c < channels; ++c) b.channels.push_back(gaussian_noise({seed, c}, length));
  return b;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b, std::size_t from = 0, std::size_t to = SIZE_MAX) {
  double worst = 0.0;
  for (std::size_t n = from; n < std::min({a.size(), b.size(), to}); ++n) worst = std::max(worst, std::abs(a[n] - b[n]));
  return worst;
}

}  // namespace

TEST_CASE("one channel orchestration equals the single channel generator", "[engine]") {
  const auto cfg = short_config(1, 3.0, 77);
  const auto buf = generate_uncorrelated_channels(cfg);
  REQUIRE(buf.num_channels() == 1);
  const auto direct = generate_single_channel(cfg.gain_model, cfg.codebook, cfg.ar_coeffs, cfg.duration_s,
                                              cfg.corcos.sample_rate_hz, channel_streams(77, 0));
  CHECK(buf.channels[0] == direct);
}

TEST_CASE("pre-mix channels are uncorrelated but share an envelope", "[engine]") {
  const auto buf = generate_uncorrelated_channels(short_config(4, 60.0, 1));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      INFO("pair " << i << "-" << j);
      CHECK(std::abs(testing::pearson(buf.channels[i], buf.channels[j])) < 0.02);
      const auto ei = testing::block_rms(buf.channels[i], 1600);
      const auto ej = testing::block_rms(buf.channels[j], 1600);
      CHECK(testing::pearson(ei, ej) > 0.8);
    }
  }
}

TEST_CASE("channel generation does not depend on scheduling", "[engine]") {
  const auto cfg = short_config(3, 4.0, 12);
  const auto a = generate_uncorrelated_channels(cfg);
  const auto b = generate_uncorrelated_channels(cfg);
  CHECK(a.channels == b.channels);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto shared = simulate_long_term_gain(cfg.gain_model.markov, 400, channel_streams(12, 0).long_term);
    CHECK(a.channels[c] == generate_single_channel(cfg.gain_model, cfg.codebook, cfg.ar_coeffs, 4.0, 16000.0,
                                                   channel_streams(12, c), &shared));
  }
}

TEST_CASE("mixing a single channel is the STFT round trip", "[mixing]") {
  CorcosParams p;
  p.num_channels = 1;
  const auto set = build_matrix_set(p);
  const auto in = noise_buffer(1, 40000, 30);
  const auto out = apply_spatial_mixing(in, set, hann_quarter_hop(2048));
  CHECK(testing::relative_l2_error(out.channels[0], in.channels[0]) <= 1e-10);
}

TEST_CASE("identity coherence leaves every channel unchanged", "[mixing]") {
  CorcosParams p;
  p.num_channels = 3;
  p.mic_spacing_m = 1e6;  // coherence underflows to zero above DC
  auto set = build_matrix_set(p);
  for (std::size_t k = 1; k < set.num_bins(); ++k) {
    CHECK(set.cholesky_factors[k] == ComplexMatrix::Identity(3, 3));
  }
  // DC is always fully coherent; replace it to get Gamma = I at every bin.
  set.cholesky_factors[0] = ComplexMatrix::Identity(3, 3);
  const auto in = noise_buffer(3, 40000, 31);
  const auto out = apply_spatial_mixing(in, set, hann_quarter_hop(2048));
  for (std::size_t c = 0; c < 3; ++c) CHECK(testing::relative_l2_error(out.channels[c], in.channels[c]) <= 1e-10);
}

TEST_CASE("mixing preserves channel 1", "[mixing]") {
  for (double doa : {0.0, 1.0, std::numbers::pi / 2.0}) {
    CorcosParams p;
    p.num_channels = 4;
    p.doa_rad = doa;
    const auto set = build_matrix_set(p);
    const auto in = noise_buffer(4, 30000, 32);
    const auto out = apply_spatial_mixing(in, set, hann_quarter_hop(2048));
    CHECK(testing::relative_l2_error(out.channels[0], in.channels[0]) <= 1e-10);
  }
}

TEST_CASE("mixing is frame-local", "[mixing]") {
  CorcosParams p;
  p.num_channels = 2;
  p.doa_rad = 0.3;
  const auto set = build_matrix_set(p);
  const auto spec = hann_quarter_hop(2048);
  const auto whole = noise_buffer(2, 64 * 512, 33);
  const std::size_t split = 32 * 512;
  MultichannelBuffer first, second;
  for (const auto& ch : whole.channels) {
    first.channels.emplace_back(ch.begin(), ch.begin() + split);
    second.channels.emplace_back(ch.begin() + split, ch.end());
  }
  const auto w = apply_spatial_mixing(whole, set, spec);
  const auto a = apply_spatial_mixing(first, set, spec);
  const auto b = apply_spatial_mixing(second, set, spec);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(max_abs_diff(w.channels[c], a.channels[c], 0, split - 2048) < 1e-10);
    const std::span<const double> tail(w.channels[c].data() + split, second.num_samples());
    CHECK(max_abs_diff(tail, b.channels[c], 2048) < 1e-10);
  }
}

TEST_CASE("mixing keeps per-channel level", "[mixing]") {
  CorcosParams p;
  p.num_channels = 4;
  const auto set = build_matrix_set(p);
  const auto in = noise_buffer(4, 160000, 34);
  const auto out = apply_spatial_mixing(in, set, hann_quarter_hop(2048));
  for (std::size_t c = 0; c < 4; ++c) {
    const double ratio_db = 20.0 * std::log10(testing::rms(out.channels[c]) / testing::rms(in.channels[c]));
    CHECK(std::abs(ratio_db) <= 3.0);
  }
}

TEST_CASE("mixing argument errors", "[mixing]") {
  CorcosParams p;
  p.num_channels = 3;
  const auto set = build_matrix_set(p);
  CHECK_THROWS_AS(apply_spatial_mixing(noise_buffer(2, 10000, 1), set, hann_quarter_hop(2048)), ArgumentError);
  CHECK_THROWS_AS(apply_spatial_mixing(noise_buffer(3, 10000, 1), CoherenceMatrixSet{}, hann_quarter_hop(2048)),
                  ArgumentError);
}

TEST_CASE("generate is deterministic and peak-normalized", "[engine]") {
  const auto cfg = short_config(2, 5.0, 99);
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  CHECK(a.signals.channels == b.signals.channels);
  CHECK(a.normalization_gain == b.normalization_gain);
  CHECK(a.signals.num_samples() == 80000);
  double peak = 0.0;
  for (const auto& ch : a.signals.channels) {
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  CHECK_THAT(peak, WithinAbs(kOutputPeak, 1e-12));
  CHECK(a.normalization_gain > 0.0);
  CHECK(a.max_regularization > 0.0);
  CHECK(a.max_regularization <= kMaxRegularization);

  auto other = cfg;
  other.master_seed = 100;
  CHECK(generate(other).signals.channels != a.signals.channels);
}

TEST_CASE("simulation config validation", "[engine]") {
  auto cfg = short_config(2, 0.2);  // 3200 samples < 2K
  CHECK_THROWS_AS(generate(cfg), ConfigError);
  cfg = short_config(2, 5.0);
  cfg.window = hann_quarter_hop(4096);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = short_config(2, 5.0);
  cfg.ar_coeffs = {-2.0, 1.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = short_config(2, -1.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = short_config(0, 5.0);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(short_config(2, 0.256).validate());
}

TEST_CASE("three-channel generation imposes the model coherence", "[engine][slow]") {
  const auto cfg = short_config(3, 600.0, 5);
  const auto out = generate(cfg);
  const auto est = estimate_coherence(out.signals, cfg.window, cfg.corcos.fft_length);
  for (std::size_t i = 0; i + 1 < 3; ++i) CHECK(nmse(est, cfg.corcos, i, i + 1, 1000.0).value <= 0.05);
  // Separation scaling at low frequency.
  double near = 0.0, far = 0.0;
  for (std::size_t k = 7; k <= 64; ++k) {
    near += std::abs(*est.at(0, 1, k));
    far += std::abs(*est.at(0, 2, k));
  }
  CHECK(far < near);
}
