#pragma once

#include <stdexcept>
#include <string>

namespace btower {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested quantity is only defined in the other exponent regime.
class RegimeMismatch : public Error {
 public:
  using Error::Error;
};

/// A regime hypothesis (sign of V, exponent window) fails.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure stopped before reaching its tolerance.
/// Carries the best estimate available when it gave up.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), err_(error_estimate) {}
  double best_estimate() const { return best_; }
  double error_estimate() const { return err_; }

 private:
  double best_;
  double err_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A linear system is singular or too badly conditioned to trust.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// The truncated computational domain cannot represent the integrand.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Spike locations are not strictly increasing (epsilon too large).
class ValidityError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_r) : Error(what), last_r_(last_r) {}
  double last_valid_r() const { return last_r_; }

 private:
  double last_r_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

}  // namespace btower
