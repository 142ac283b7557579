#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "affect/features.hpp"

namespace affect::features {

struct SynthConfig {
  std::array<int, kNumClasses> per_class{};  // epochs per class
  double noise = 0.2;          // 0 = clean, scales additive noise and jitter
  std::uint64_t seed = 0;
  int subjects = 10;
  double duration_s = 32.0;    // session length; each yields duration/2 epochs

  static SynthConfig uniform(int per_class_count, double noise, std::uint64_t seed);
};

// Class identity is encoded jointly: which EEG bands carry power, where in
// the window the dominant burst sits, how deeply the beat intervals are
// modulated, and how many skin-conductance responses fire.
struct SynthClassParams {
  int primary_band = 0;
  int secondary_band = 0;
  double primary_gain = 6.0;
  double secondary_gain = 3.0;
  double burst_center_s = 1.0;
  double base_bpm = 100.0;
  double hrv_depth = 0.02;
  int scr_count = 0;
  double eda_level = 2.0;
  double temp_slope = 0.0;
};

SynthClassParams synth_class_params(int class_id);

class SynthGenerator {
 public:
  explicit SynthGenerator(SynthConfig cfg);

  // Deterministic in (seed, class_id, index); independent of call order.
  Recording make(int class_id, int index) const;
  PersonalityVector personality(int subject_id) const;
  const SynthConfig& config() const { return cfg_; }

 private:
  SynthConfig cfg_;
};

std::vector<Recording> synth_generate(const SynthConfig& cfg);

}  // namespace affect::features
