#pragma once

#include <stdexcept>
#include <string>

namespace ovaib {

// Shape/index preconditions violated by the caller.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Numeric preconditions violated (non-finite input, empty sequence, bad range).
class ValueError : public std::invalid_argument {
 public:
  explicit ValueError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed configuration or serialized artifact.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ovaib
