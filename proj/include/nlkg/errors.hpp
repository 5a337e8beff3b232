#pragma once

#include <stdexcept>
#include <string>

namespace nlkg {

// Precondition violations. The CLI maps these to exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failures. The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct CrossingCenters : NumericalError {
  using NumericalError::NumericalError;
};

struct BlowUp : NumericalError {
  using NumericalError::NumericalError;
};

struct NewtonDiverged : NumericalError {
  using NumericalError::NumericalError;
};

struct SearchExhausted : NumericalError {
  using NumericalError::NumericalError;
  double longest_exit_time = 0.0;
};

struct WindowTooShort : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace nlkg
