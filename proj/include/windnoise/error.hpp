#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace windnoise {

// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or settings (bad window, unstable filter, unknown config key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed call arguments (empty buffers, dimension or grid mismatch).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// The coherence matrix could not be factorized even after regularization.
class ModelError : public Error {
 public:
  ModelError(const std::string& what, std::size_t bin)
      : Error(what + " (bin " + std::to_string(bin) + ")"), bin_(bin) {}

  std::size_t bin() const noexcept { return bin_; }

 private:
  std::size_t bin_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace windnoise
