#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace specderiv {

/// Short %g rendering of a number for error messages.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-side mistakes: bad shapes, violated preconditions, bad inputs.
/// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ContractViolation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A function was asked for a derivative order it does not provide, or an
/// engine was asked for an order beyond its configured ceiling.
class CapabilityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Arguments outside the domain interval of a scalar function.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The distinct-eigenvalue engine was handed a matrix with a repeated
/// eigenvalue (up to the coincidence tolerance).
class DistinctSpectrumError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Eigensolver or evaluation breakdown. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace specderiv
