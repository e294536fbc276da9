#pragma once

#include <stdexcept>
#include <string>

namespace sngca {

/* Base class for everything thrown by this library. */
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/* Configuration / input-shape problems (CLI exit code 2). */
struct ConfigError : Error {
  using Error::Error;
};

struct DimensionMismatch : ConfigError {
  using ConfigError::ConfigError;
};

struct InvalidSpec : ConfigError {
  using ConfigError::ConfigError;
};

struct EmptyData : ConfigError {
  using ConfigError::ConfigError;
};

struct ZeroVarianceColumn : ConfigError {
  explicit ZeroVarianceColumn(int col)
      : ConfigError("column " + std::to_string(col) + " has zero variance"), column(col) {}
  int column;
};

struct NonUnitDirection : ConfigError {
  using ConfigError::ConfigError;
};

struct UnsupportedAlpha : ConfigError {
  using ConfigError::ConfigError;
};

struct TooFewSamples : ConfigError {
  using ConfigError::ConfigError;
};

struct TooManySamples : ConfigError {
  using ConfigError::ConfigError;
};

struct InvalidRank : ConfigError {
  using ConfigError::ConfigError;
};

struct IoError : ConfigError {
  using ConfigError::ConfigError;
};

/* Numerical failures (CLI exit code 3). */
struct NumericalError : Error {
  using Error::Error;
};

struct SolverNotConverged : NumericalError {
  SolverNotConverged(int iters, double gap_)
      : NumericalError("solver did not converge after " + std::to_string(iters) +
                       " iterations (feasibility gap " + std::to_string(gap_) + ")"),
        iterations(iters),
        gap(gap_) {}
  int iterations;
  double gap;
};

struct DegenerateSpan : NumericalError {
  using NumericalError::NumericalError;
};

struct MaxIterations : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace sngca
