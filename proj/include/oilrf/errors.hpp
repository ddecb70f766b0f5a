#pragma once

#include <stdexcept>
#include <string>

namespace oilrf {

// Bad or inconsistent configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unusable input data: parse, schema, coverage or domain problems (exit code 3).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure such as a rank-deficient design matrix (exit code 4).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oilrf
