#pragma once

#include <stdexcept>
#include <string>

namespace stabest {

// Malformed input data: broken streams, shape mismatches, out-of-range values.
// The CLI maps this to exit code 1.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Unusable configuration: invalid parameter combinations, unreadable paths.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stabest
