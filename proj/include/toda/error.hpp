#pragma once

#include <stdexcept>
#include <string>

namespace toda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (e.g. |z| >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid grid or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Overflow, non-convergence or a failed linear solve.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A monotonicity / ordering witness failed; the computed result is not trustworthy.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace toda
