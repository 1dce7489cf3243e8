#pragma once

#include <cstddef>
#include <vector>

#include "windnoise/error.hpp"

namespace windnoise {

// N aligned channels of time-domain samples.
struct MultichannelBuffer {
  std::vector<std::vector<double>> channels;
  double sample_rate_hz = 16000.0;

  std::size_t num_channels() const noexcept { return channels.size(); }
  std::size_t num_samples() const noexcept { return channels.empty() ? 0 : channels.front().size(); }

  void validate() const {
    if (channels.empty()) throw ArgumentError("buffer has no channels");
    if (!(sample_rate_hz > 0.0)) throw ArgumentError("sample rate must be positive");
    for (const auto& ch : channels) {
      if (ch.size() != channels.front().size()) throw ArgumentError("channels differ in length");
    }
  }
};

}  // namespace windnoise
