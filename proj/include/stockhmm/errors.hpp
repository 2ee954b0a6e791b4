#pragma once

#include <stdexcept>
#include <string>

namespace stockhmm {

// Base class for all toolkit errors. The CLI maps each branch of the
// hierarchy to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad call: invalid parameter values, mismatched dimensions, empty inputs.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Bad or missing data: IO failures, malformed files, empty archives,
// series too short for the requested operation.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-positive-definite covariance, model documents
// whose parameters violate a model invariant.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace stockhmm
