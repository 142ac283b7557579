#pragma once

#include <stdexcept>
#include <string>

namespace affect {

// Error taxonomy mirrors the CLI exit codes: usage(1), data(2), numeric(3).

// Bad flags, missing arguments, invalid command combinations.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed files, invalid signals, shape mismatches, contract violations.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: divergence, degenerate statistics, singular systems.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative method failed to converge within its budget.
struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& msg, int iters)
      : NumericError(msg), iterations(iters) {}
  int iterations = 0;
};

}  // namespace affect
