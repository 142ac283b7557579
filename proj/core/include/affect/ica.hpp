#pragma once

#include <vector>

#include "affect/signal.hpp"

namespace affect::dsp {

// Small dense row-major matrix, enough for mixing/unmixing bookkeeping.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct IcaResult {
  Signal sources;              // n_components x T (channel-major)
  Mat mixing;                  // channels x n_components, X_centered ~= mixing * S
  Mat unmixing;                // n_components x channels, S = unmixing * X_centered
  std::vector<double> channel_means;
  int iterations = 0;
};

// FastICA with the tanh (log-cosh) contrast and symmetric decorrelation.
// Data is centered and whitened internally; initialization is a fixed
// deterministic orthonormal matrix so results are reproducible without a
// seed. Throws ConvergenceError (with the iteration count) if the
// symmetric update fails to settle within max_iter iterations.
IcaResult fastica(const Signal& eeg, int n_components, int max_iter = 200,
                  double tol = 1e-4);

// Variance of each source row, sample-normalized (1/(T-1)).
std::vector<double> component_variances(const Signal& sources);

// Reconstruct the multichannel signal with the k largest-variance
// components removed. k = 0 reproduces the input up to numerical error.
Signal remove_high_variance_components(const IcaResult& ica, int k);

}  // namespace affect::dsp
