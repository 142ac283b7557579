#pragma once

#include <utility>
#include <vector>

#include "affect/signal.hpp"

namespace affect::dsp {

// All operations are pure: they never mutate their inputs and hold no
// shared state, so they are safe to call concurrently.

// Zero-phase FIR bandpass (windowed-sinc, Hamming), applied forward-backward.
// Requires lo < hi < fs/2 and a signal longer than the filter.
Signal fir_bandpass_zero_phase(const Signal& x, double lo_hz, double hi_hz);

// Zero-phase IIR notch at f0 (biquad, applied forward-backward).
Signal notch_filter(const Signal& x, double f0_hz, double q = 30.0);

// Butterworth bandpass of the given prototype order, run as second-order
// sections forward and backward (magnitude squared, zero phase distortion).
Signal butter_sos_filtfilt(const Signal& x, const Band& band, int order = 4);

// Polyphase rational-ratio resampling with an anti-alias lowpass at
// 0.9x the smaller Nyquist. Output length = round(n * new_fs / fs).
Signal resample(const Signal& x, double new_fs);

// Per-channel standardization to mean 0, std 1 (sample std, ddof=1).
// Throws NumericError naming the channel if a channel has zero variance.
Signal zscore(const Signal& x);

// Subtract the instantaneous mean across channels. Requires >= 2 channels.
Signal common_average_reference(const Signal& x);

// Centered moving average with reflection padding; output length preserved.
Signal moving_average(const Signal& x, double window_seconds);

// Welch's averaged-periodogram PSD estimate of a single-channel signal.
Spectrum welch_psd(const Signal& x, const WelchConfig& cfg);

// Mean power density over the band's bins. Throws DataError if no bin
// falls inside the band.
double band_power(const Spectrum& s, const Band& band);

// Integrated power over [band.lo, band.hi] by piecewise-linear
// interpolation of the PSD; never empty for a >= 2 bin spectrum.
double band_power_integrated(const Spectrum& s, const Band& band);

// Local maxima with a minimum spacing (seconds) and a prominence of at
// least prominence_factor * std(x). Indices strictly increasing.
std::vector<int> detect_peaks(const Signal& x, double min_distance_s,
                              double prominence_factor);

// Ordinary least squares of x against time in seconds: returns
// (intercept b0, slope b1 per second).
std::pair<double, double> linear_slope(const Signal& x);

}  // namespace affect::dsp
