#pragma once

#include <complex>
#include <vector>

namespace affect::dsp::detail {

// Complex FFT of arbitrary length (radix-2 in place, Bluestein otherwise).
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Real-input FFT: returns the n/2+1 nonnegative-frequency bins.
std::vector<std::complex<double>> rfft(const double* x, int n);

}  // namespace affect::dsp::detail
