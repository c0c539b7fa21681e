#pragma once

#include <stdexcept>
#include <string>

namespace rabi {

/// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: inadequate grid, norm drift, non-convergence (CLI exit code 3).
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rabi
