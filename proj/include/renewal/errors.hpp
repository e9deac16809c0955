#pragma once

#include <stdexcept>
#include <string>

namespace renewal {

/// Argument outside the domain of an operation (t < u, time outside a solved range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid construction or configuration parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A numerical result failed an internal consistency check.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thinning exceeded its proposal cap; the kernel is almost certainly broken.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A result whose truncation error estimate dominates the value itself.
class UnreliableResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace renewal
