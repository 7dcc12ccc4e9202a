#pragma once

#include <stdexcept>
#include <string>

namespace aoisim {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model parameter violates its constraint (non-positive rate, bad count, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A formula was evaluated outside its domain (e.g. rho outside (0,1)).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The per-period event cap was hit.
class InternalLimitError : public Error {
 public:
  using Error::Error;
};

// A timeline without any delivered update was given to a metric.
class EmptyTrajectoryError : public Error {
 public:
  using Error::Error;
};

// Time average requested over a zero-length span.
class UndefinedAverageError : public Error {
 public:
  using Error::Error;
};

// Numerical integration did not reach the requested tolerance.
class OracleError : public Error {
 public:
  using Error::Error;
};

// File output / input failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace aoisim
