#pragma once

#include <stdexcept>
#include <string>

namespace omchaos {

/// Invalid configuration, parameters, or precondition violations (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failures: divergence, non-convergence, step-size underflow (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem and output failures (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace omchaos
