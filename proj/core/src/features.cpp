#include "affect/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affect/errors.hpp"
#include "affect/ica.hpp"
#include "affect/rng.hpp"

namespace affect::features {

namespace {

constexpr double kTwoPiE = 2.0 * 3.14159265358979323846 * 2.718281828459045235;

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double sample_var(std::span<const double> v) {
  const double s = sample_std(v);
  return s * s;
}

template <class E>
[[noreturn]] void stage_fail(const char* stage, const E& e) {
  throw E("preprocess_eeg[" + std::string(stage) + "]: " + e.what());
}

dsp::Signal window_slice(const dsp::Signal& s, double t0, double t1) {
  const int a = static_cast<int>(std::llround(t0 * s.fs));
  const int b = static_cast<int>(std::llround(t1 * s.fs));
  dsp::Signal out = dsp::Signal::zeros(s.channels, b - a, s.fs);
  for (int c = 0; c < s.channels; ++c) {
    auto src = s.channel(c);
    auto dst = out.channel(c);
    for (int i = a; i < b; ++i) dst[static_cast<std::size_t>(i - a)] = src[static_cast<std::size_t>(i)];
  }
  return out;
}

bool covers(const dsp::Signal& s, double t1) {
  return static_cast<int>(std::llround(t1 * s.fs)) <= s.length();
}

// Sensor dropouts are marked with NaN in raw recordings; a window is only
// valid when every sample of every peripheral modality is present.
bool window_valid(const dsp::Signal& s, double t0, double t1) {
  if (!covers(s, t1)) return false;
  const int a = static_cast<int>(std::llround(t0 * s.fs));
  const int b = static_cast<int>(std::llround(t1 * s.fs));
  for (int c = 0; c < s.channels; ++c) {
    auto ch = s.channel(c);
    for (int i = a; i < b; ++i) {
      if (!std::isfinite(ch[static_cast<std::size_t>(i)])) return false;
    }
  }
  return true;
}

}  // namespace

const std::array<std::string, kEEGChannels>& eeg_channel_names() {
  static const std::array<std::string, kEEGChannels> names = {
      "AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
      "O2",  "P8", "T8", "FC6", "F4", "F8", "AF4"};
  return names;
}

const std::array<std::string, kNumClasses>& emotion_names() {
  static const std::array<std::string, kNumClasses> names = {
      "angry", "disgust", "fear", "happy", "neutral", "sad", "surprise"};
  return names;
}

std::string emotion_name(EmotionLabel label) {
  return emotion_names()[static_cast<std::size_t>(label)];
}

EmotionLabel emotion_from_index(int i) {
  if (i < 0 || i >= kNumClasses) throw DataError("emotion index " + std::to_string(i) + " out of range");
  return static_cast<EmotionLabel>(i);
}

std::vector<int> Dataset::indices(Split s) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (split[i] == s) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

void Dataset::recount() {
  class_counts.fill(0);
  for (const Sample& s : samples) ++class_counts[static_cast<std::size_t>(s.label)];
}

dsp::Signal preprocess_eeg(const dsp::Signal& raw) {
  raw.validate("preprocess_eeg input");
  if (raw.duration() < kEpochSeconds) {
    throw DataError("preprocess_eeg: need at least 2 s of data");
  }

  dsp::Signal x;
  try {
    x = dsp::fir_bandpass_zero_phase(raw, 1.0, 45.0);
  } catch (const DataError& e) {
    stage_fail("bandpass", e);
  }
  try {
    x = dsp::notch_filter(x, 50.0);
  } catch (const DataError& e) {
    stage_fail("notch", e);
  }
  try {
    dsp::IcaResult ica = dsp::fastica(x, x.channels);
    x = dsp::remove_high_variance_components(ica, std::min(2, x.channels - 1));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("preprocess_eeg[ica]: " + std::string(e.what()), e.iterations);
  } catch (const NumericError& e) {
    stage_fail("ica", e);
  } catch (const DataError& e) {
    stage_fail("ica", e);
  }
  try {
    x = dsp::common_average_reference(x);
    x = dsp::resample(x, kCleanEEGRate);
    x = dsp::zscore(x);
  } catch (const NumericError& e) {
    stage_fail("normalize", e);
  } catch (const DataError& e) {
    stage_fail("normalize", e);
  }
  return x;
}

std::vector<double> compute_psd_features(const dsp::Signal& eeg) {
  eeg.validate("compute_psd_features");
  const auto& bands = dsp::canonical_bands();
  std::vector<double> out(static_cast<std::size_t>(eeg.channels) * bands.size(), 0.0);
  for (int c = 0; c < eeg.channels; ++c) {
    dsp::Signal ch = dsp::Signal::univariate(
        {eeg.channel(c).begin(), eeg.channel(c).end()}, eeg.fs);
    dsp::Spectrum spec = dsp::welch_psd(ch, dsp::WelchConfig::defaults(eeg.fs, ch.length()));
    for (std::size_t b = 0; b < bands.size(); ++b) {
      out[static_cast<std::size_t>(c) * bands.size() + b] = dsp::band_power(spec, bands[b]);
    }
  }
  return out;
}

std::vector<double> compute_de_features(const dsp::Signal& eeg) {
  eeg.validate("compute_de_features");
  const auto& bands = dsp::canonical_bands();
  std::vector<double> out(static_cast<std::size_t>(eeg.channels) * bands.size(), 0.0);
  for (int c = 0; c < eeg.channels; ++c) {
    dsp::Signal ch = dsp::Signal::univariate(
        {eeg.channel(c).begin(), eeg.channel(c).end()}, eeg.fs);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      dsp::Signal filtered = dsp::butter_sos_filtfilt(ch, bands[b], 4);
      // variance floor keeps a silent band finite instead of -inf
      const double var = std::max(sample_var(filtered.channel(0)), 1e-30);
      out[static_cast<std::size_t>(c) * bands.size() + b] = 0.5 * std::log(kTwoPiE * var);
    }
  }
  return out;
}

std::vector<double> compute_band_stats(const dsp::Signal& eeg) {
  eeg.validate("compute_band_stats");
  const auto& bands = dsp::canonical_bands();
  std::vector<double> out(static_cast<std::size_t>(eeg.channels) * bands.size() * 4, 0.0);
  for (int c = 0; c < eeg.channels; ++c) {
    dsp::Signal ch = dsp::Signal::univariate(
        {eeg.channel(c).begin(), eeg.channel(c).end()}, eeg.fs);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      dsp::Signal filtered = dsp::butter_sos_filtfilt(ch, bands[b], 4);
      auto v = filtered.channel(0);
      const double m = mean_of(v);
      double m2 = 0.0, m3 = 0.0, m4 = 0.0;
      for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
      }
      const double n = static_cast<double>(v.size());
      m2 /= n;
      m3 /= n;
      m4 /= n;
      double skew = 0.0, kurt = 0.0;
      if (m2 > 1e-24) {
        skew = m3 / std::pow(m2, 1.5);
        kurt = m4 / (m2 * m2) - 3.0;
      }
      const std::size_t base = (static_cast<std::size_t>(c) * bands.size() + b) * 4;
      out[base] = m;
      out[base + 1] = sample_std(v);
      out[base + 2] = skew;
      out[base + 3] = kurt;
    }
  }
  return out;
}

std::array<double, 3> compute_faa(const dsp::Signal& eeg) {
  eeg.validate("compute_faa");
  if (eeg.channels != kEEGChannels) {
    throw DataError("compute_faa: expected the 14-channel montage");
  }
  const dsp::Band alpha = dsp::canonical_bands()[2];
  auto alpha_power = [&](int channel) {
    dsp::Signal ch = dsp::Signal::univariate(
        {eeg.channel(channel).begin(), eeg.channel(channel).end()}, eeg.fs);
    dsp::Spectrum spec = dsp::welch_psd(ch, dsp::WelchConfig::defaults(eeg.fs, ch.length()));
    const double p = dsp::band_power(spec, alpha);
    if (!(p > 0.0)) {
      throw NumericError("compute_faa: zero alpha power in channel " +
                         eeg_channel_names()[static_cast<std::size_t>(channel)]);
    }
    return p;
  };
  // (right, left): AF4-AF3, F8-F7, F4-F3
  const std::array<std::pair<int, int>, 3> pairs = {{{13, 0}, {12, 1}, {11, 2}}};
  std::array<double, 3> faa{};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    faa[i] = std::log(alpha_power(pairs[i].first)) - std::log(alpha_power(pairs[i].second));
  }
  return faa;
}

std::array<double, 7> compute_hrv_features(const dsp::Signal& bvp) {
  bvp.validate("compute_hrv_features");
  const std::vector<int> peaks = dsp::detect_peaks(bvp, 0.5, 0.1);
  if (peaks.size() < 2) {
    throw NumericError("compute_hrv_features: fewer than 2 beats detected (" +
                       std::to_string(peaks.size()) + ")");
  }

  std::vector<double> ibi(peaks.size() - 1);
  std::vector<double> ibi_t(peaks.size() - 1);
  for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
    ibi[i] = (peaks[i + 1] - peaks[i]) / bvp.fs;
    ibi_t[i] = peaks[i + 1] / bvp.fs;
  }

  const double mean_ibi = mean_of(ibi);
  const double sdnn = sample_std(ibi);
  double rmssd = 0.0;
  if (ibi.size() >= 2) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ibi.size(); ++i) {
      const double d = ibi[i + 1] - ibi[i];
      acc += d * d;
    }
    rmssd = std::sqrt(acc / static_cast<double>(ibi.size() - 1));
  }

  // LF/HF from the tachogram resampled onto a uniform 4 Hz grid
  double lf = 0.0, hf = 0.0;
  if (ibi.size() >= 2) {
    const double t0 = ibi_t.front(), t1 = ibi_t.back();
    const int grid_n = static_cast<int>(std::floor((t1 - t0) * 4.0)) + 1;
    if (grid_n >= 4) {
      std::vector<double> grid(static_cast<std::size_t>(grid_n));
      std::size_t seg = 0;
      for (int g = 0; g < grid_n; ++g) {
        const double t = t0 + g / 4.0;
        while (seg + 1 < ibi_t.size() && ibi_t[seg + 1] < t) ++seg;
        if (seg + 1 >= ibi_t.size()) {
          grid[static_cast<std::size_t>(g)] = ibi.back();
        } else {
          const double w = (t - ibi_t[seg]) / (ibi_t[seg + 1] - ibi_t[seg]);
          grid[static_cast<std::size_t>(g)] = ibi[seg] + w * (ibi[seg + 1] - ibi[seg]);
        }
      }
      dsp::Signal tach = dsp::Signal::univariate(std::move(grid), 4.0);
      dsp::WelchConfig cfg = dsp::WelchConfig::defaults(256.0, tach.length());
      cfg.segment_length = std::min(tach.length(), 256);
      dsp::Spectrum spec = dsp::welch_psd(tach, cfg);
      lf = dsp::band_power_integrated(spec, dsp::Band{0.04, 0.15, "lf"});
      hf = dsp::band_power_integrated(spec, dsp::Band{0.15, 0.40, "hf"});
    }
  }
  const double ratio = hf > 1e-18 ? lf / hf : 0.0;

  return {mean_ibi, sdnn, rmssd, lf, hf, ratio, static_cast<double>(peaks.size())};
}

std::array<double, 8> compute_eda_features(const dsp::Signal& eda) {
  eda.validate("compute_eda_features");
  const dsp::Signal tonic = dsp::moving_average(eda, 4.0);
  dsp::Signal phasic = eda;
  for (std::size_t i = 0; i < phasic.samples.size(); ++i) {
    phasic.samples[i] = eda.samples[i] - tonic.samples[i];
  }

  auto t = tonic.channel(0);
  auto p = phasic.channel(0);
  const auto [b0, b1] = dsp::linear_slope(tonic);
  (void)b0;

  double pmax = p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());

  const std::vector<int> scr = dsp::detect_peaks(phasic, 1.0, 0.1);
  double scr_amp = 0.0;
  for (int idx : scr) scr_amp += p[static_cast<std::size_t>(idx)];
  if (!scr.empty()) scr_amp /= static_cast<double>(scr.size());

  return {mean_of(t), sample_std(t), b1,
          mean_of(p), sample_std(p), pmax,
          static_cast<double>(scr.size()), scr_amp};
}

std::array<double, 7> compute_hr_features(const dsp::Signal& hr) {
  hr.validate("compute_hr_features");
  auto v = hr.channel(0);
  if (v.size() < 2) throw DataError("compute_hr_features: need at least 2 samples");
  const double mn = *std::min_element(v.begin(), v.end());
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> diff(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) diff[i] = v[i + 1] - v[i];
  return {mean_of(v), sample_std(v), mn, mx, mx - mn, mean_of(diff), sample_std(diff)};
}

std::array<double, 6> compute_temp_features(const dsp::Signal& temp) {
  temp.validate("compute_temp_features");
  auto v = temp.channel(0);
  if (v.size() < 2) throw DataError("compute_temp_features: need at least 2 samples");
  const auto [b0, b1] = dsp::linear_slope(temp);
  const double mn = *std::min_element(v.begin(), v.end());
  const double mx = *std::max_element(v.begin(), v.end());
  return {mean_of(v), sample_std(v), mn, mx, b1, b0};
}

std::vector<Epoch> epoch_recording(const Recording& rec, const dsp::Signal& clean_eeg,
                                   int* dropped_coverage) {
  clean_eeg.validate("epoch_recording eeg");
  int dropped = 0;
  std::vector<Epoch> epochs;
  const int max_windows = static_cast<int>(std::floor(clean_eeg.duration() / kEpochSeconds));

  for (int w = 0; w < max_windows; ++w) {
    const double t0 = w * static_cast<double>(kEpochSeconds);
    const double t1 = t0 + kEpochSeconds;
    if (!covers(clean_eeg, t1) || !window_valid(rec.bvp, t0, t1) ||
        !window_valid(rec.eda, t0, t1) || !window_valid(rec.temp, t0, t1)) {
      ++dropped;
      continue;
    }
    Epoch ep;
    ep.eeg = window_slice(clean_eeg, t0, t1);
    ep.bvp = window_slice(rec.bvp, t0, t1);
    ep.eda = window_slice(rec.eda, t0, t1);
    ep.temp = window_slice(rec.temp, t0, t1);
    ep.subject_id = rec.subject_id;
    ep.label = rec.label;

    // instantaneous heart rate from the in-window beats
    std::vector<int> peaks = dsp::detect_peaks(ep.bvp, 0.5, 0.1);
    std::vector<double> rate;
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
      rate.push_back(60.0 * ep.bvp.fs / (peaks[i + 1] - peaks[i]));
    }
    ep.hr = dsp::Signal::univariate(std::move(rate), 1.0);
    epochs.push_back(std::move(ep));
  }
  if (dropped_coverage) *dropped_coverage = dropped;
  return epochs;
}

Sample extract_sample(const Epoch& epoch, const PersonalityVector& personality) {
  if (epoch.eeg.channels != kEEGChannels || epoch.eeg.length() != kEpochEEGSamples) {
    throw DataError("extract_sample: epoch EEG must be 14 x 256 at 128 Hz");
  }
  Sample s;
  s.eeg_raw.assign(epoch.eeg.samples.begin(), epoch.eeg.samples.end());
  s.eeg.psd = compute_psd_features(epoch.eeg);
  s.eeg.de = compute_de_features(epoch.eeg);
  s.eeg.stats = compute_band_stats(epoch.eeg);
  s.eeg.asym = compute_faa(epoch.eeg);
  s.peripheral.hrv = compute_hrv_features(epoch.bvp);
  s.peripheral.eda = compute_eda_features(epoch.eda);
  s.peripheral.hr = compute_hr_features(epoch.hr);
  s.peripheral.temp = compute_temp_features(epoch.temp);
  s.personality = personality;
  s.label = epoch.label;
  s.subject_id = epoch.subject_id;

  for (double v : s.eeg_raw) {
    if (!std::isfinite(v)) throw NumericError("extract_sample: non-finite raw EEG");
  }
  auto check = [](std::span<const double> v, const char* what) {
    for (double x : v) {
      if (!std::isfinite(x)) throw NumericError(std::string("extract_sample: non-finite ") + what);
    }
  };
  check(s.eeg.psd, "psd");
  check(s.eeg.de, "de");
  check(s.eeg.stats, "stats");
  check(s.eeg.asym, "asym");
  check(s.peripheral.hrv, "hrv");
  check(s.peripheral.eda, "eda");
  check(s.peripheral.hr, "hr");
  check(s.peripheral.temp, "temp");
  return s;
}

std::vector<Sample> process_recording(const Recording& rec, PipelineReport& report) {
  ++report.recordings;
  dsp::Signal clean;
  try {
    clean = preprocess_eeg(rec.eeg);
  } catch (const std::exception& e) {
    ++report.recordings_failed;
    if (report.errors.size() < 16) report.errors.emplace_back(e.what());
    return {};
  }

  int dropped = 0;
  std::vector<Epoch> epochs = epoch_recording(rec, clean, &dropped);
  report.windows += static_cast<int>(epochs.size()) + dropped;
  report.dropped_coverage += dropped;

  std::vector<Sample> out;
  for (const Epoch& ep : epochs) {
    try {
      out.push_back(extract_sample(ep, rec.personality));
    } catch (const std::exception& e) {
      ++report.dropped_features;
      if (report.errors.size() < 16) report.errors.emplace_back(e.what());
    }
  }
  return out;
}

Dataset assemble_dataset(std::vector<Sample> samples, double split_ratio, std::uint64_t seed) {
  if (!(split_ratio > 0.0) || !(split_ratio < 1.0)) {
    throw DataError("assemble_dataset: split ratio must lie in (0, 1)");
  }
  std::array<std::vector<int>, kNumClasses> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_class[static_cast<std::size_t>(samples[i].label)].push_back(static_cast<int>(i));
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < 2) {
      throw DataError("assemble_dataset: class '" + emotion_names()[static_cast<std::size_t>(c)] +
                      "' has fewer than 2 samples");
    }
  }

  Dataset ds;
  ds.samples = std::move(samples);
  ds.split.assign(ds.samples.size(), Split::Test);
  Rng rng = Rng(seed).stream("split");
  for (int c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[static_cast<std::size_t>(c)];
    rng.shuffle(idx);
    const int n = static_cast<int>(idx.size());
    const int train_n = std::clamp(static_cast<int>(std::llround(split_ratio * n)), 1, n - 1);
    for (int i = 0; i < train_n; ++i) ds.split[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = Split::Train;
  }
  ds.recount();
  return ds;
}

std::array<double, kNumClasses> compute_class_weights(const Dataset& ds) {
  double total = 0.0;
  for (int c : ds.class_counts) {
    if (c == 0) throw DataError("compute_class_weights: empty class");
    total += c;
  }
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c) {
    w[static_cast<std::size_t>(c)] = total / (kNumClasses * static_cast<double>(ds.class_counts[static_cast<std::size_t>(c)]));
  }
  return w;
}

}  // namespace affect::features
