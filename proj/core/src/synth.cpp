#include "affect/synth.hpp"

#include <cmath>

#include "affect/errors.hpp"
#include "affect/rng.hpp"

namespace affect::features {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Band-center oscillator frequencies for delta..gamma.
constexpr std::array<double, 5> kBandCenters = {2.5, 6.0, 10.5, 21.0, 37.0};

// Blink projection across the montage: strongest at the frontal pairs.
constexpr std::array<double, kEEGChannels> kBlinkGain = {
    1.0, 0.7, 0.55, 0.3, 0.12, 0.08, 0.05, 0.05, 0.08, 0.12, 0.3, 0.55, 0.7, 0.95};

double gauss_bump(double t, double center, double sigma) {
  const double d = (t - center) / sigma;
  return std::exp(-0.5 * d * d);
}

}  // namespace

SynthConfig SynthConfig::uniform(int per_class_count, double noise, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.per_class.fill(per_class_count);
  cfg.noise = noise;
  cfg.seed = seed;
  return cfg;
}

SynthClassParams synth_class_params(int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw DataError("synth_class_params: class id out of range");
  }
  SynthClassParams p;
  p.primary_band = class_id % 5;
  // the +1 shift for classes 5 and 6 keeps every (primary, secondary)
  // pair distinct across the seven classes
  p.secondary_band = (class_id + 2 + class_id / 5) % 5;
  p.primary_gain = 6.0;
  p.secondary_gain = 3.0;
  // position of the dominant burst inside every 2 s window: early for the
  // first three classes, late for the next three, centered for the last
  if (class_id < 3) {
    p.burst_center_s = 0.35 + 0.1 * class_id;
  } else if (class_id < 6) {
    p.burst_center_s = 1.45 + 0.1 * (class_id - 3);
  } else {
    p.burst_center_s = 1.0;
  }
  p.base_bpm = 92.0 + 3.0 * class_id;
  p.hrv_depth = 0.01 + 0.015 * (class_id % 3);
  p.scr_count = class_id % 3;
  p.eda_level = 2.0 + 0.4 * class_id;
  p.temp_slope = -0.015 + 0.005 * class_id;
  return p;
}

SynthGenerator::SynthGenerator(SynthConfig cfg) : cfg_(std::move(cfg)) {
  for (int n : cfg_.per_class) {
    if (n < 0) throw DataError("synth: per-class counts must be non-negative");
  }
  if (cfg_.subjects < 1) throw DataError("synth: need at least one subject");
  if (cfg_.duration_s < kEpochSeconds) throw DataError("synth: sessions must cover one epoch");
}

PersonalityVector SynthGenerator::personality(int subject_id) const {
  Rng rng = Rng(cfg_.seed).stream("personality/" + std::to_string(subject_id));
  PersonalityVector p;
  for (int i = 0; i < 5; ++i) p.big5[static_cast<std::size_t>(i)] = 1 + static_cast<int>(rng.uniform_int(4));
  return p;
}

// One synthetic stimulus session. EEG is built as an identifiable 14-source
// mixture: 12 bursty band-limited "neural" sources plus a frontal blink
// source and a cardiac spike source, mixed by a fixed per-subject matrix.
// Session-level ICA can then isolate and drop the two artifact sources the
// way the preprocessing pipeline expects.
Recording SynthGenerator::make(int class_id, int index) const {
  const SynthClassParams p = synth_class_params(class_id);
  Rng rng = Rng(cfg_.seed).stream("synth/" + std::to_string(class_id) + "/" + std::to_string(index));
  const double noise = cfg_.noise;
  const double dur = cfg_.duration_s;

  auto jitter = [&](double base, double frac) {
    return base * (1.0 + noise * frac * rng.normal());
  };

  Recording rec;
  rec.label = static_cast<EmotionLabel>(class_id);
  rec.subject_id = index % cfg_.subjects;
  rec.personality = personality(rec.subject_id);

  // --- EEG sources
  const int n_eeg = static_cast<int>(std::llround(dur * kRawEEGRate));
  std::vector<std::vector<double>> sources(
      kEEGChannels, std::vector<double>(static_cast<std::size_t>(n_eeg), 0.0));

  std::array<double, 5> band_amp{};
  for (int b = 0; b < 5; ++b) band_amp[static_cast<std::size_t>(b)] = jitter(0.8, 0.3);
  band_amp[static_cast<std::size_t>(p.primary_band)] = jitter(p.primary_gain, 0.3);
  band_amp[static_cast<std::size_t>(p.secondary_band)] = jitter(p.secondary_gain, 0.3);
  const double burst_center = p.burst_center_s + noise * 0.05 * rng.normal();

  for (int j = 0; j < kEEGChannels - 2; ++j) {
    auto& src = sources[static_cast<std::size_t>(j)];
    const int band = j % 5;
    const double freq = kBandCenters[static_cast<std::size_t>(band)] * (1.0 + 0.10 * (rng.uniform() - 0.5));
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double amp = band_amp[static_cast<std::size_t>(band)];
    const bool bursty = band == p.primary_band;

    // sparse random bursts keep each source strongly super-Gaussian
    const int n_bursts = static_cast<int>(dur * 1.2) + 1;
    std::vector<double> bursts(static_cast<std::size_t>(n_bursts));
    for (double& b : bursts) b = rng.uniform(0.0, dur);

    for (int i = 0; i < n_eeg; ++i) {
      const double t = i / kRawEEGRate;
      double env = 0.25;
      for (double bt : bursts) {
        const double d = t - bt;
        if (std::abs(d) < 0.5) env += gauss_bump(t, bt, 0.09);
      }
      if (bursty) {
        // the class signature repeats inside every epoch window
        const double tw = std::fmod(t, static_cast<double>(kEpochSeconds));
        env += 1.8 * gauss_bump(tw, burst_center, 0.25);
      }
      const double u = rng.uniform() - 0.5;
      const double rough = (u < 0.0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u));
      src[static_cast<std::size_t>(i)] = amp * env * std::sin(2.0 * kPi * freq * t + phase) + 0.3 * rough;
    }
  }

  // blink artifact: a few large frontal deflections per session
  {
    auto& src = sources[kEEGChannels - 2];
    const int n_blinks = static_cast<int>(dur / 3.0) + 1;
    std::vector<double> blink_t(static_cast<std::size_t>(n_blinks));
    for (double& t : blink_t) t = rng.uniform(0.2, dur - 0.2);
    const double amp = 45.0 * (1.0 + 0.1 * rng.normal());
    for (int i = 0; i < n_eeg; ++i) {
      const double t = i / kRawEEGRate;
      for (double bt : blink_t) {
        const double d = t - bt;
        if (std::abs(d) < 0.5) src[static_cast<std::size_t>(i)] += amp * gauss_bump(t, bt, 0.08);
      }
    }
  }
  // cardiac spike artifact
  {
    auto& src = sources[kEEGChannels - 1];
    const double phase = rng.uniform(0.0, 0.7);
    for (int i = 0; i < n_eeg; ++i) {
      const double t = std::fmod(i / kRawEEGRate + phase, 1.0 / 1.3);
      src[static_cast<std::size_t>(i)] = 12.0 * gauss_bump(t, 0.05, 0.015);
    }
  }

  // fixed per-subject head mixing: identity plus mild cross-talk, with the
  // artifact columns following their physical projections
  Rng mix_rng = Rng(cfg_.seed).stream("mixing/" + std::to_string(rec.subject_id));
  std::vector<double> mix(static_cast<std::size_t>(kEEGChannels) * kEEGChannels);
  for (int i = 0; i < kEEGChannels; ++i) {
    for (int j = 0; j < kEEGChannels - 2; ++j) {
      mix[static_cast<std::size_t>(i) * kEEGChannels + j] = (i == j ? 1.0 : 0.0) + 0.3 * mix_rng.normal();
    }
    mix[static_cast<std::size_t>(i) * kEEGChannels + (kEEGChannels - 2)] = kBlinkGain[static_cast<std::size_t>(i)];
    mix[static_cast<std::size_t>(i) * kEEGChannels + (kEEGChannels - 1)] = 0.25 + 0.02 * i;
  }

  rec.eeg = dsp::Signal::zeros(kEEGChannels, n_eeg, kRawEEGRate);
  for (int c = 0; c < kEEGChannels; ++c) {
    auto ch = rec.eeg.channel(c);
    for (int i = 0; i < n_eeg; ++i) {
      double acc = 0.0;
      for (int j = 0; j < kEEGChannels; ++j) {
        acc += mix[static_cast<std::size_t>(c) * kEEGChannels + j] * sources[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      }
      ch[static_cast<std::size_t>(i)] = acc + (noise > 0.0 ? 2.0 * noise * rng.normal() : 0.0);
    }
  }

  // --- BVP: pulse train with modulated inter-beat intervals
  const int n_bvp = static_cast<int>(std::llround(dur * kBVPRate));
  rec.bvp = dsp::Signal::zeros(1, n_bvp, kBVPRate);
  {
    auto ch = rec.bvp.channel(0);
    const double bpm = p.base_bpm + noise * 4.0 * rng.normal();
    const double nominal_ibi = 60.0 / bpm;
    const double mod_phase = rng.uniform(0.0, 2.0 * kPi);
    double t = rng.uniform(0.0, nominal_ibi);
    while (t < dur + 0.5) {
      const int lo = std::max(0, static_cast<int>((t - 0.4) * kBVPRate));
      const int hi = std::min(n_bvp, static_cast<int>((t + 0.6) * kBVPRate));
      for (int i = lo; i < hi; ++i) {
        const double ti = i / kBVPRate;
        ch[static_cast<std::size_t>(i)] += gauss_bump(ti, t, 0.05) + 0.25 * gauss_bump(ti, t + 0.22 * nominal_ibi, 0.04);
      }
      t += nominal_ibi * (1.0 + p.hrv_depth * std::sin(2.0 * kPi * 0.25 * t + mod_phase));
    }
    if (noise > 0.0) {
      for (int i = 0; i < n_bvp; ++i) ch[static_cast<std::size_t>(i)] += 0.05 * noise * rng.normal();
    }
  }

  // --- EDA: tonic level + drift; SCR bumps repeating per epoch window
  const int n_eda = static_cast<int>(std::llround(dur * kEDARate));
  rec.eda = dsp::Signal::zeros(1, n_eda, kEDARate);
  {
    auto ch = rec.eda.channel(0);
    const double level = jitter(p.eda_level, 0.2);
    const double drift = 0.01 * rng.normal();
    for (int i = 0; i < n_eda; ++i) {
      const double t = i / kEDARate;
      const double tw = std::fmod(t, static_cast<double>(kEpochSeconds));
      double v = level + drift * t;
      for (int s = 0; s < p.scr_count; ++s) {
        v += 0.35 * (1.0 + 0.15 * class_id / 6.0) * gauss_bump(tw, 0.5 + 0.7 * s, 0.12);
      }
      if (noise > 0.0) v += 0.05 * noise * rng.normal();
      ch[static_cast<std::size_t>(i)] = v;
    }
  }

  // --- skin temperature: baseline + class slope
  const int n_temp = static_cast<int>(std::llround(dur * kTempRate));
  rec.temp = dsp::Signal::zeros(1, n_temp, kTempRate);
  {
    auto ch = rec.temp.channel(0);
    const double base = 33.0 + 0.15 * class_id + noise * 0.1 * rng.normal();
    const double slope = p.temp_slope * (1.0 + noise * 0.2 * rng.normal());
    for (int i = 0; i < n_temp; ++i) {
      const double t = i / kTempRate;
      ch[static_cast<std::size_t>(i)] = base + slope * t + (noise > 0.0 ? 0.02 * noise * rng.normal() : 0.0);
    }
  }

  return rec;
}

std::vector<Recording> synth_generate(const SynthConfig& cfg) {
  SynthGenerator gen(cfg);
  std::vector<Recording> out;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int i = 0; i < cfg.per_class[static_cast<std::size_t>(c)]; ++i) {
      out.push_back(gen.make(c, i));
    }
  }
  return out;
}

}  // namespace affect::features
