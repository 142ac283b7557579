#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace affect::dsp {

// Uniformly sampled time series. Multichannel data is stored channel-major
// (channel c occupies samples[c*length .. (c+1)*length)).
struct Signal {
  std::vector<double> samples;
  double fs = 0.0;
  int channels = 1;

  int length() const {
    return channels > 0 ? static_cast<int>(samples.size()) / channels : 0;
  }
  double duration() const { return fs > 0 ? length() / fs : 0.0; }

  std::span<double> channel(int c) {
    return {samples.data() + static_cast<std::size_t>(c) * length(),
            static_cast<std::size_t>(length())};
  }
  std::span<const double> channel(int c) const {
    return {samples.data() + static_cast<std::size_t>(c) * length(),
            static_cast<std::size_t>(length())};
  }

  static Signal univariate(std::vector<double> s, double fs) {
    return Signal{std::move(s), fs, 1};
  }
  static Signal zeros(int channels, int length, double fs) {
    return Signal{std::vector<double>(static_cast<std::size_t>(channels) * length, 0.0),
                  fs, channels};
  }

  // Throws DataError if fs <= 0, sample count is not divisible by the
  // channel count, or any sample is NaN/Inf.
  void validate(const char* context = "signal") const;
};

struct Band {
  double lo = 0.0;  // Hz
  double hi = 0.0;  // Hz
  std::string name;
};

// delta(1-4), theta(4-8), alpha(8-13), beta(13-30), gamma(30-45)
const std::array<Band, 5>& canonical_bands();

enum class Window { Hann, Hamming, Rectangular };

struct WelchConfig {
  int segment_length = 0;   // L, samples
  double overlap = 0.5;     // fraction in [0, 1)
  Window window = Window::Hann;

  int hop() const;                       // samples between segment starts
  int segment_count(int n) const;        // K for a signal of n samples
  // L = min(fs, n) rounded down, 50% overlap, Hann.
  static WelchConfig defaults(double fs, int n);
};

// One-sided power spectral density: power[k] is the density (signal
// units^2 / Hz) at freq[k] = k * df.
struct Spectrum {
  std::vector<double> freq;
  std::vector<double> power;
  double df = 0.0;
};

}  // namespace affect::dsp
