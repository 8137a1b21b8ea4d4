#pragma once

#include <stdexcept>
#include <string>

namespace tlstark {

/// Base class of all library errors. The CLI maps each subclass to its own
/// exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative or adaptive numerics failed to reach the requested tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration (unknown keys, bad ranges).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Measurement data that cannot be used (unreadable files, too few points,
/// rank-deficient fits, insufficient measurements).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Scan sequence violates the measurement protocol (missing references).
class ProtocolError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace tlstark
