#pragma once

#include <stdexcept>
#include <string>

namespace agesir {

/// Shape or grid mismatch between objects that must share a discretization.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem data violating a model invariant (positivity, bounds, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of a specialised routine does not hold (e.g. a kernel that
/// is not separable handed to the scalar reduction).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative method failed: stalled, diverged or hit its iteration cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration could not keep the state admissible.
class IntegrationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed scenario file. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace agesir
