#include "affect/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>

#include "affect/errors.hpp"
#include "fft.hpp"

namespace affect::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample variance (ddof = 1).
double variance_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

// Odd (antisymmetric) reflection used before forward-backward filtering,
// mirroring the signal about its end values.
std::vector<double> odd_reflect_pad(std::span<const double> x, int pad) {
  const int n = static_cast<int>(x.size());
  std::vector<double> y(static_cast<std::size_t>(n + 2 * pad));
  for (int i = 0; i < pad; ++i) y[static_cast<std::size_t>(i)] = 2.0 * x[0] - x[static_cast<std::size_t>(pad - i)];
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(pad + i)] = x[static_cast<std::size_t>(i)];
  for (int i = 0; i < pad; ++i)
    y[static_cast<std::size_t>(pad + n + i)] = 2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(n - 2 - i)];
  return y;
}

// ---------------------------------------------------------------------------
// FIR machinery

std::vector<double> design_fir_bandpass(double lo_hz, double hi_hz, double fs) {
  // Windowed sinc with a Hamming window; ~3.3*fs/width taps for the
  // chosen 2 Hz transition width.
  const double transition_hz = 2.0;
  int taps = static_cast<int>(std::ceil(3.3 * fs / transition_hz));
  if (taps % 2 == 0) ++taps;
  const int mid = (taps - 1) / 2;
  const double w1 = 2.0 * kPi * lo_hz / fs;
  const double w2 = 2.0 * kPi * hi_hz / fs;
  std::vector<double> h(static_cast<std::size_t>(taps));
  for (int i = 0; i < taps; ++i) {
    const int k = i - mid;
    double ideal;
    if (k == 0) {
      ideal = (w2 - w1) / kPi;
    } else {
      ideal = (std::sin(w2 * k) - std::sin(w1 * k)) / (kPi * k);
    }
    const double ham = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (taps - 1));
    h[static_cast<std::size_t>(i)] = ideal * ham;
  }
  return h;
}

// Causal FIR with zero initial history.
std::vector<double> fir_apply(std::span<const double> x, const std::vector<double>& h) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(h.size());
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const int kmax = std::min(m - 1, i);
    for (int k = 0; k <= kmax; ++k) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(i - k)];
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::vector<double> fir_filtfilt_channel(std::span<const double> x, const std::vector<double>& h) {
  const int n = static_cast<int>(x.size());
  const int pad = std::min(3 * (static_cast<int>(h.size()) - 1), n - 1);
  std::vector<double> padded = odd_reflect_pad(x, pad);
  std::vector<double> fwd = fir_apply(padded, h);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = fir_apply(fwd, h);
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + pad, bwd.begin() + pad + n};
}

// ---------------------------------------------------------------------------
// Second-order sections

struct Sos {
  // y[n] = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2 (a0 normalized to 1)
  double b0, b1, b2, a1, a2;
  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

void sos_apply(const std::vector<Sos>& sos, std::vector<double>& x, double x0) {
  // Direct form II transposed with step-response initial conditions
  // scaled by x0 (the first padded sample), like sosfiltfilt.
  double level = x0;
  for (const Sos& s : sos) {
    const double g = s.dc_gain();
    double s1 = (g - s.b0) * level;
    double s2 = (s.b2 - s.a2 * g) * level;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level *= g;
  }
}

// Samples until the slowest pole decays below 1e-4.
int sos_settle_samples(const std::vector<Sos>& sos) {
  double r_max = 0.0;
  for (const Sos& s : sos) {
    const double disc = s.a1 * s.a1 - 4.0 * s.a2;
    double radius;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      radius = std::max(std::abs((-s.a1 + sq) / 2.0), std::abs((-s.a1 - sq) / 2.0));
    } else {
      radius = std::sqrt(s.a2);
    }
    r_max = std::max(r_max, radius);
  }
  if (!(r_max > 0.0) || r_max >= 1.0) return 1 << 20;
  return static_cast<int>(std::ceil(std::log(1e-4) / std::log(r_max)));
}

std::vector<double> sos_filtfilt_channel(std::span<const double> x, const std::vector<Sos>& sos) {
  const int n = static_cast<int>(x.size());
  const int min_pad = 3 * (2 * static_cast<int>(sos.size()) + 1);
  if (n - 1 < min_pad) {
    throw DataError("sos_filtfilt: signal too short for padding (" +
                    std::to_string(n) + " samples, need > " + std::to_string(min_pad) + ")");
  }
  const int pad = std::min(n - 1, std::max(min_pad, sos_settle_samples(sos)));
  std::vector<double> y = odd_reflect_pad(x, pad);
  sos_apply(sos, y, y.front());
  std::reverse(y.begin(), y.end());
  sos_apply(sos, y, y.front());
  std::reverse(y.begin(), y.end());
  return {y.begin() + pad, y.begin() + pad + n};
}

// Butterworth bandpass as cascaded biquads: analog prototype poles,
// lowpass->bandpass transform, bilinear mapping with prewarped edges.
std::vector<Sos> design_butter_bandpass(int order, double lo_hz, double hi_hz, double fs) {
  using cd = std::complex<double>;
  const double fs2 = 2.0 * fs;
  const double w1 = fs2 * std::tan(kPi * lo_hz / fs);
  const double w2 = fs2 * std::tan(kPi * hi_hz / fs);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Prototype poles on the unit circle's left half.
  std::vector<cd> proto(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    const double theta = kPi * (2.0 * k + order - 1.0) / (2.0 * order);
    proto[static_cast<std::size_t>(k - 1)] = cd(std::cos(theta), std::sin(theta));
  }

  // Bandpass transform doubles the pole count.
  std::vector<cd> apoles;
  apoles.reserve(static_cast<std::size_t>(2 * order));
  for (const cd& p : proto) {
    const cd half = 0.5 * bw * p;
    const cd disc = std::sqrt(half * half - w0sq);
    apoles.push_back(half + disc);
    apoles.push_back(half - disc);
  }

  // Digital gain: analog gain bw^order times the bilinear correction.
  cd correction(1.0, 0.0);
  for (const cd& p : apoles) correction /= (fs2 - p);
  double k_digital = std::pow(bw * fs2, order) * correction.real();

  // Map poles and group conjugate pairs; every section gets zeros at
  // z = +1 and z = -1, which factors (z-1)^N (z+1)^N exactly.
  std::vector<cd> zpoles;
  for (const cd& p : apoles) zpoles.push_back((fs2 + p) / (fs2 - p));
  std::sort(zpoles.begin(), zpoles.end(), [](const cd& a, const cd& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  std::vector<Sos> sos;
  std::vector<bool> used(zpoles.size(), false);
  const double k_section = std::pow(std::abs(k_digital), 1.0 / order);
  const double k_sign = k_digital < 0 ? -1.0 : 1.0;
  bool first = true;
  for (std::size_t i = 0; i < zpoles.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    // Find the conjugate partner.
    std::size_t j = i;
    double best = 1e300;
    for (std::size_t t = i + 1; t < zpoles.size(); ++t) {
      if (used[t]) continue;
      const double d = std::abs(zpoles[t] - std::conj(zpoles[i]));
      if (d < best) {
        best = d;
        j = t;
      }
    }
    used[j] = true;
    const cd p = zpoles[i];
    const cd q = zpoles[j];
    Sos s{};
    const double g = first ? k_section * k_sign : k_section;
    first = false;
    s.b0 = g;
    s.b1 = 0.0;
    s.b2 = -g;
    s.a1 = -(p + q).real();
    s.a2 = (p * q).real();
    sos.push_back(s);
  }
  return sos;
}

void check_band(double lo, double hi, double fs, const char* op) {
  if (!(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0)) {
    throw DataError(std::string(op) + ": band (" + std::to_string(lo) + ", " +
                    std::to_string(hi) + ") Hz invalid for fs=" + std::to_string(fs));
  }
}

Signal per_channel(const Signal& x, const std::function<std::vector<double>(std::span<const double>)>& f) {
  Signal out = x;
  for (int c = 0; c < x.channels; ++c) {
    std::vector<double> y = f(x.channel(c));
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  out.validate("filter output");
  return out;
}

long long gcd_ll(long long a, long long b) { return b == 0 ? a : gcd_ll(b, a % b); }

// Best rational approximation p/q to r with q <= max_den (continued fractions).
std::pair<long long, long long> rationalize(double r, long long max_den) {
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = r;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(x);
    long long ai = static_cast<long long>(a);
    if (q0 + ai * q1 > max_den) break;
    long long p2 = ai * p1 + p0;
    long long q2 = ai * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = x - a;
    if (frac < 1e-12) break;
    x = 1.0 / frac;
  }
  const long long g = gcd_ll(std::max<long long>(p1, 1), std::max<long long>(q1, 1));
  return {p1 / g, q1 / g};
}

}  // namespace

void Signal::validate(const char* context) const {
  if (!(fs > 0.0)) throw DataError(std::string(context) + ": sampling rate must be positive");
  if (channels <= 0) throw DataError(std::string(context) + ": channel count must be positive");
  if (samples.size() % static_cast<std::size_t>(channels) != 0) {
    throw DataError(std::string(context) + ": sample count not divisible by channels");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw DataError(std::string(context) + ": non-finite sample");
  }
}

const std::array<Band, 5>& canonical_bands() {
  static const std::array<Band, 5> bands = {{{1.0, 4.0, "delta"},
                                             {4.0, 8.0, "theta"},
                                             {8.0, 13.0, "alpha"},
                                             {13.0, 30.0, "beta"},
                                             {30.0, 45.0, "gamma"}}};
  return bands;
}

int WelchConfig::hop() const {
  const int step = segment_length - static_cast<int>(std::floor(overlap * segment_length));
  return std::max(1, step);
}

int WelchConfig::segment_count(int n) const {
  if (segment_length <= 0 || segment_length > n) return 0;
  return 1 + (n - segment_length) / hop();
}

WelchConfig WelchConfig::defaults(double fs, int n) {
  WelchConfig cfg;
  cfg.segment_length = std::max(2, std::min(static_cast<int>(fs), n));
  cfg.overlap = 0.5;
  cfg.window = Window::Hann;
  return cfg;
}

Signal fir_bandpass_zero_phase(const Signal& x, double lo_hz, double hi_hz) {
  x.validate("fir_bandpass");
  check_band(lo_hz, hi_hz, x.fs, "fir_bandpass");
  const std::vector<double> h = design_fir_bandpass(lo_hz, hi_hz, x.fs);
  if (x.length() <= static_cast<int>(h.size())) {
    throw DataError("fir_bandpass: signal length " + std::to_string(x.length()) +
                    " must exceed filter order " + std::to_string(h.size()));
  }
  return per_channel(x, [&](std::span<const double> ch) { return fir_filtfilt_channel(ch, h); });
}

Signal notch_filter(const Signal& x, double f0_hz, double q) {
  x.validate("notch_filter");
  if (!(f0_hz > 0.0) || !(f0_hz < x.fs / 2.0)) {
    throw DataError("notch_filter: f0=" + std::to_string(f0_hz) + " Hz outside (0, fs/2)");
  }
  const double w0 = 2.0 * kPi * f0_hz / x.fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Sos s{};
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  const std::vector<Sos> sos{s};
  return per_channel(x, [&](std::span<const double> ch) { return sos_filtfilt_channel(ch, sos); });
}

Signal butter_sos_filtfilt(const Signal& x, const Band& band, int order) {
  x.validate("butter_sos_filtfilt");
  check_band(band.lo, band.hi, x.fs, "butter_sos_filtfilt");
  if (order < 1) throw DataError("butter_sos_filtfilt: order must be >= 1");
  const std::vector<Sos> sos = design_butter_bandpass(order, band.lo, band.hi, x.fs);
  return per_channel(x, [&](std::span<const double> ch) { return sos_filtfilt_channel(ch, sos); });
}

Signal resample(const Signal& x, double new_fs) {
  x.validate("resample");
  if (!(new_fs > 0.0)) throw DataError("resample: new_fs must be positive");
  const auto [p, q] = rationalize(new_fs / x.fs, 1024);
  if (p == 1 && q == 1) {
    Signal out = x;
    out.fs = new_fs;
    return out;
  }
  const int n = x.length();
  const long long n_out = std::llround(static_cast<double>(n) * p / static_cast<double>(q));

  // Anti-alias lowpass at 0.9x the smaller Nyquist, applied at the
  // upsampled rate fs*p with gain p.
  const double fs_high = x.fs * static_cast<double>(p);
  const double cutoff = 0.45 * std::min(x.fs, new_fs);
  const int half = static_cast<int>(10 * std::max(p, q));
  const int taps = 2 * half + 1;
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double wc = 2.0 * kPi * cutoff / fs_high;
  for (int i = 0; i < taps; ++i) {
    const int k = i - half;
    const double ideal = (k == 0) ? wc / kPi : std::sin(wc * k) / (kPi * k);
    const double ham = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (taps - 1));
    h[static_cast<std::size_t>(i)] = ideal * ham * static_cast<double>(p);
  }

  Signal out = Signal::zeros(x.channels, static_cast<int>(n_out), new_fs);
  const int edge = half / static_cast<int>(p) + 1;
  for (int c = 0; c < x.channels; ++c) {
    const std::vector<double> padded = odd_reflect_pad(x.channel(c), edge);
    for (long long j = 0; j < n_out; ++j) {
      // Output j sits at upsampled index j*q; sum taps hitting real samples.
      const long long center = j * q;
      double acc = 0.0;
      for (int i = -half; i <= half; ++i) {
        const long long up = center - i;
        if (up % p != 0) continue;
        const long long src = up / p + edge;
        if (src < 0 || src >= static_cast<long long>(padded.size())) continue;
        acc += h[static_cast<std::size_t>(i + half)] * padded[static_cast<std::size_t>(src)];
      }
      out.channel(c)[static_cast<std::size_t>(j)] = acc;
    }
  }
  out.validate("resample output");
  return out;
}

Signal zscore(const Signal& x) {
  x.validate("zscore");
  Signal out = x;
  for (int c = 0; c < x.channels; ++c) {
    auto ch = out.channel(c);
    const double m = mean_of(ch);
    const double sd = std::sqrt(variance_of(ch));
    if (!(sd > 0.0)) {
      throw NumericError("zscore: zero variance in channel " + std::to_string(c));
    }
    for (double& v : ch) v = (v - m) / sd;
  }
  return out;
}

Signal common_average_reference(const Signal& x) {
  x.validate("common_average_reference");
  if (x.channels < 2) throw DataError("common_average_reference: needs >= 2 channels");
  Signal out = x;
  const int n = x.length();
  for (int t = 0; t < n; ++t) {
    double m = 0.0;
    for (int c = 0; c < x.channels; ++c) m += x.channel(c)[static_cast<std::size_t>(t)];
    m /= x.channels;
    for (int c = 0; c < x.channels; ++c) out.channel(c)[static_cast<std::size_t>(t)] -= m;
  }
  return out;
}

Signal moving_average(const Signal& x, double window_seconds) {
  x.validate("moving_average");
  const int n = x.length();
  int w = std::max(1, static_cast<int>(std::llround(window_seconds * x.fs)));
  w = std::min(w, n);
  const int left = (w - 1) / 2;
  const int right = w / 2;
  Signal out = x;
  for (int c = 0; c < x.channels; ++c) {
    auto src = x.channel(c);
    auto dst = out.channel(c);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = i - left; k <= i + right; ++k) {
        // symmetric reflection at the edges
        int idx = k;
        if (idx < 0) idx = -idx - 1;
        if (idx >= n) idx = 2 * n - 1 - idx;
        acc += src[static_cast<std::size_t>(idx)];
      }
      dst[static_cast<std::size_t>(i)] = acc / w;
    }
  }
  return out;
}

Spectrum welch_psd(const Signal& x, const WelchConfig& cfg) {
  x.validate("welch_psd");
  if (x.channels != 1) throw DataError("welch_psd: expects a single-channel signal");
  const int n = x.length();
  const int L = cfg.segment_length;
  if (L < 2 || L > n) {
    throw DataError("welch_psd: segment length " + std::to_string(L) +
                    " invalid for signal of " + std::to_string(n) + " samples");
  }
  if (!(cfg.overlap >= 0.0) || !(cfg.overlap < 1.0)) {
    throw DataError("welch_psd: overlap must be in [0, 1)");
  }

  std::vector<double> w(static_cast<std::size_t>(L), 1.0);
  if (cfg.window == Window::Hann) {
    for (int i = 0; i < L; ++i) w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / L));
  } else if (cfg.window == Window::Hamming) {
    for (int i = 0; i < L; ++i) w[static_cast<std::size_t>(i)] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / L);
  }
  double u = 0.0;
  for (double v : w) u += v * v;
  u /= L;  // U = mean(w^2)

  const int hop = cfg.hop();
  const int segments = cfg.segment_count(n);
  const int bins = L / 2 + 1;
  Spectrum spec;
  spec.df = x.fs / L;
  spec.freq.resize(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) spec.freq[static_cast<std::size_t>(k)] = k * spec.df;
  spec.power.assign(static_cast<std::size_t>(bins), 0.0);

  std::vector<double> seg(static_cast<std::size_t>(L));
  auto src = x.channel(0);
  for (int s = 0; s < segments; ++s) {
    const int start = s * hop;
    double m = 0.0;
    for (int i = 0; i < L; ++i) m += src[static_cast<std::size_t>(start + i)];
    m /= L;
    for (int i = 0; i < L; ++i) seg[static_cast<std::size_t>(i)] = (src[static_cast<std::size_t>(start + i)] - m) * w[static_cast<std::size_t>(i)];
    const auto fx = detail::rfft(seg.data(), L);
    for (int k = 0; k < bins; ++k) {
      double p = std::norm(fx[static_cast<std::size_t>(k)]) / (x.fs * L * u);
      const bool interior = k != 0 && !(L % 2 == 0 && k == bins - 1);
      if (interior) p *= 2.0;  // one-sided
      spec.power[static_cast<std::size_t>(k)] += p;
    }
  }
  if (segments > 0) {
    for (double& p : spec.power) p /= segments;
  }
  return spec;
}

double band_power(const Spectrum& s, const Band& band) {
  double acc = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < s.freq.size(); ++k) {
    const bool in = band.hi >= s.freq.back()
                        ? (s.freq[k] >= band.lo && s.freq[k] <= band.hi)
                        : (s.freq[k] >= band.lo && s.freq[k] < band.hi);
    if (in) {
      acc += s.power[k];
      ++count;
    }
  }
  if (count == 0) {
    throw DataError("band_power: no spectral bins in band [" + std::to_string(band.lo) +
                    ", " + std::to_string(band.hi) + "] Hz");
  }
  return acc / count;
}

double band_power_integrated(const Spectrum& s, const Band& band) {
  if (s.freq.size() < 2) return 0.0;
  const double lo = std::max(band.lo, s.freq.front());
  const double hi = std::min(band.hi, s.freq.back());
  if (!(hi > lo)) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < s.freq.size(); ++k) {
    const double f0 = s.freq[k], f1 = s.freq[k + 1];
    const double a = std::max(f0, lo), b = std::min(f1, hi);
    if (b <= a) continue;
    const double t0 = (a - f0) / (f1 - f0), t1 = (b - f0) / (f1 - f0);
    const double pa = s.power[k] + t0 * (s.power[k + 1] - s.power[k]);
    const double pb = s.power[k] + t1 * (s.power[k + 1] - s.power[k]);
    acc += 0.5 * (pa + pb) * (b - a);
  }
  return acc;
}

std::vector<int> detect_peaks(const Signal& x, double min_distance_s, double prominence_factor) {
  x.validate("detect_peaks");
  if (x.channels != 1) throw DataError("detect_peaks: expects a single-channel signal");
  const int n = x.length();
  auto v = x.channel(0);
  if (min_distance_s * x.fs < 1.0) {
    throw DataError("detect_peaks: min_distance below one sample");
  }

  double m = mean_of(v), acc = 0.0;
  for (double s : v) acc += (s - m) * (s - m);
  const double sd = n > 0 ? std::sqrt(acc / n) : 0.0;
  const double min_prom = prominence_factor * sd;

  std::vector<int> cands;
  for (int i = 1; i + 1 < n; ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i - 1)] &&
        v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(i + 1)]) {
      // prominence: drop to the lowest point before a higher sample,
      // on each side, keep the higher of the two bases
      double lmin = v[static_cast<std::size_t>(i)], rmin = v[static_cast<std::size_t>(i)];
      for (int j = i - 1; j >= 0; --j) {
        if (v[static_cast<std::size_t>(j)] > v[static_cast<std::size_t>(i)]) break;
        lmin = std::min(lmin, v[static_cast<std::size_t>(j)]);
      }
      for (int j = i + 1; j < n; ++j) {
        if (v[static_cast<std::size_t>(j)] > v[static_cast<std::size_t>(i)]) break;
        rmin = std::min(rmin, v[static_cast<std::size_t>(j)]);
      }
      const double prom = v[static_cast<std::size_t>(i)] - std::max(lmin, rmin);
      if (prom >= min_prom) cands.push_back(i);
    }
  }

  // Greedy by height: keep taller peaks, drop any later candidate closer
  // than the minimum spacing.
  const int dmin = static_cast<int>(std::ceil(min_distance_s * x.fs - 1e-9));
  std::vector<int> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return v[static_cast<std::size_t>(cands[static_cast<std::size_t>(a)])] >
           v[static_cast<std::size_t>(cands[static_cast<std::size_t>(b)])];
  });
  std::vector<int> kept;
  for (int oi : order) {
    const int idx = cands[static_cast<std::size_t>(oi)];
    bool ok = true;
    for (int k : kept) {
      if (std::abs(k - idx) < dmin) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::pair<double, double> linear_slope(const Signal& x) {
  x.validate("linear_slope");
  if (x.channels != 1) throw DataError("linear_slope: expects a single-channel signal");
  const int n = x.length();
  if (n < 2) throw DataError("linear_slope: needs at least 2 samples");
  auto v = x.channel(0);
  double st = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    st += i / x.fs;
    sy += v[static_cast<std::size_t>(i)];
  }
  const double tm = st / n, ym = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dt = i / x.fs - tm;
    sxx += dt * dt;
    sxy += dt * (v[static_cast<std::size_t>(i)] - ym);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {ym - slope * tm, slope};
}

}  // namespace affect::dsp
