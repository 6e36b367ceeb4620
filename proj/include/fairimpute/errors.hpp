#pragma once

#include <stdexcept>
#include <string>

namespace fairimpute {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration (split fractions, empty imputer list, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A theorem's stated hypotheses are violated by the supplied inputs.
class AssumptionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Non-finite values, singular systems, failed convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be computed on the given data.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Too many bootstrap resamples produced undefined values.
class ReliabilityError : public Error {
 public:
  using Error::Error;
};

/// Input data does not match the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairimpute
