#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twofluid {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inadmissible input: non-positive density or temperature, a stencil that
/// leaves the admissible set, and the like.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solve (velocity recovery, Legendre inversion) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Linear algebra breakdown or an inconsistency detected in a numerical
/// construction (e.g. an asymmetric Hessian).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: syntax, range or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A time step could not be completed. Carries the failing cell and time.
class StepError : public Error {
 public:
  StepError(const std::string& what, double time, std::ptrdiff_t cell)
      : Error(what), time_(time), cell_(cell) {}

  double time() const noexcept { return time_; }
  /// Cell index, or -1 when the failure is not tied to one cell.
  std::ptrdiff_t cell() const noexcept { return cell_; }

 private:
  double time_;
  std::ptrdiff_t cell_;
};

}  // namespace twofluid
