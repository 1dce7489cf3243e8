#pragma once

// Seeded random streams.
//
// Every stochastic operation draws from an RngStream identified by
// (seed, stream_id). The generator is MT19937-64 whose 64-bit state seed is
// SplitMix64(seed) mixed with SplitMix64(stream_id); the uniform and normal
// conversions below are implemented here rather than through <random>
// distributions, so sample sequences are bit-identical across standard
// library implementations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace windnoise {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(RngStream stream)
      : engine_(splitmix64(splitmix64(stream.seed) ^ splitmix64(~stream.stream_id))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open_low() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// i.i.d. standard normal samples, deterministic per stream.
inline std::vector<double> gaussian_noise(RngStream stream, std::size_t length) {
  Rng rng(stream);
  std::vector<double> out(length);
  for (auto& v : out) v = rng.normal();
  return out;
}

}  // namespace windnoise
