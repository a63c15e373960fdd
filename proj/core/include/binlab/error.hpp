#pragma once

#include <stdexcept>
#include <string>

namespace binlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the operation's domain (e.g. nonpositive curvature).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity detected where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or missing input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in the wrong state (e.g. backward without forward).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace binlab
