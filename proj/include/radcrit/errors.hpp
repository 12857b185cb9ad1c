#pragma once

#include <stdexcept>
#include <string>

namespace radcrit {

// Base of every error raised by the library. The CLI maps the categories
// below onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (N < 3, r > 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or tabulated data.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An initial value problem left the overflow guard.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_radius)
      : Error(what), last_radius_(last_radius) {}
  double last_radius() const noexcept { return last_radius_; }

 private:
  double last_radius_;
};

// Quadrature or extrapolation did not reach the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double partial_value)
      : Error(what), partial_value_(partial_value) {}
  double partial_value() const noexcept { return partial_value_; }

 private:
  double partial_value_;
};

// Expansion fit got a non-positive difference (the S estimate is too low).
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Discrete data too coarse for the requested reconstruction.
class DiagnosticsError : public Error {
 public:
  using Error::Error;
};

// Two independent verdicts disagree (e.g. a certified point has a solution).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace radcrit
