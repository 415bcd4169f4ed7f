#pragma once

#include <stdexcept>
#include <string>

namespace tbent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical or fitting failure (CLI exit code 3).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A query fell outside the range of tabulated data (CLI exit code 4).
class RangeError : public Error {
 public:
  using Error::Error;
};

class LabelCollisionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A state still carries time-bin structure where a pure polarization register is required.
class UnresolvedDofError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

/// Mean pair number left the perturbative regime (mu >= 1).
class OutOfModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UndefinedEstimateError : public NumericError {
 public:
  using NumericError::NumericError;
};

class FitFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnidentifiableError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NoQpmSolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace tbent
