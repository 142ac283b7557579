#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "affect/dsp.hpp"

namespace affect::features {

constexpr int kEEGChannels = 14;
constexpr int kEpochSeconds = 2;
constexpr double kRawEEGRate = 256.0;
constexpr double kCleanEEGRate = 128.0;
constexpr double kBVPRate = 64.0;
constexpr double kEDARate = 4.0;
constexpr double kTempRate = 4.0;
constexpr int kEpochEEGSamples = 256;  // 2 s at 128 Hz
constexpr int kNumClasses = 7;

// Montage order: AF3 F7 F3 FC5 T7 P7 O1 O2 P8 T8 FC6 F4 F8 AF4
const std::array<std::string, kEEGChannels>& eeg_channel_names();

// Fixed alphabetical encoding 0..6.
enum class EmotionLabel { Angry = 0, Disgust, Fear, Happy, Neutral, Sad, Surprise };
const std::array<std::string, kNumClasses>& emotion_names();
std::string emotion_name(EmotionLabel label);
EmotionLabel emotion_from_index(int i);

struct PersonalityVector {
  std::array<int, 5> big5{};  // Extraversion, Neuroticism, Agreeableness,
                              // Conscientiousness, Openness; each in {1..4}
};

struct EEGFeatureSet {
  std::vector<double> psd;    // 14x5, channel-major
  std::vector<double> de;     // 14x5
  std::vector<double> stats;  // 14x20: per band (mean, std, skew, kurtosis)
  std::array<double, 3> asym{};  // FAA: AF4-AF3, F8-F7, F4-F3
};

struct PeripheralFeatureSet {
  std::array<double, 7> hrv{};   // mean IBI, SDNN, RMSSD, LF, HF, LF/HF, beats
  std::array<double, 8> eda{};   // tonic mean/std/slope, phasic mean/std/max,
                                 // SCR count, SCR mean amplitude
  std::array<double, 7> hr{};    // mean, std, min, max, range, diff mean, diff std
  std::array<double, 6> temp{};  // mean, std, min, max, slope, intercept
};

// One 2-second multimodal window.
struct Epoch {
  dsp::Signal eeg;   // 14 x 256 at 128 Hz (preprocessed)
  dsp::Signal bvp;   // 64 Hz
  dsp::Signal eda;   // 4 Hz
  dsp::Signal temp;  // 4 Hz
  dsp::Signal hr;    // instantaneous rate derived from BVP beats
  int subject_id = 0;
  EmotionLabel label = EmotionLabel::Neutral;
};

struct Sample {
  std::vector<double> eeg_raw;  // 14x256 model input
  EEGFeatureSet eeg;
  PeripheralFeatureSet peripheral;
  PersonalityVector personality;
  EmotionLabel label = EmotionLabel::Neutral;
  int subject_id = 0;
};

enum class Split { Train = 0, Test = 1 };

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Split> split;  // aligned with samples
  std::array<int, kNumClasses> class_counts{};

  std::vector<int> indices(Split s) const;
  void recount();
};

// A full multimodal recording for one stimulus presentation.
struct Recording {
  dsp::Signal eeg;   // 14 channels at 256 Hz
  dsp::Signal bvp;
  dsp::Signal eda;
  dsp::Signal temp;
  EmotionLabel label = EmotionLabel::Neutral;
  int subject_id = 0;
  PersonalityVector personality;
};

// bandpass(1-45) -> notch(50) -> ICA with top-2 variance removal ->
// common average reference -> resample(128) -> zscore. Errors are
// rethrown with the failing stage named.
dsp::Signal preprocess_eeg(const dsp::Signal& raw);

// Per-channel Welch band powers over the five canonical bands (14x5).
std::vector<double> compute_psd_features(const dsp::Signal& eeg);
// Differential entropy 0.5*ln(2*pi*e*var) of each band-filtered channel.
std::vector<double> compute_de_features(const dsp::Signal& eeg);
// Band-major (mean, std, skewness, excess kurtosis) per channel (14x20).
std::vector<double> compute_band_stats(const dsp::Signal& eeg);
// Frontal alpha asymmetry ln(P_right) - ln(P_left) for AF4-AF3, F8-F7, F4-F3.
std::array<double, 3> compute_faa(const dsp::Signal& eeg);

std::array<double, 7> compute_hrv_features(const dsp::Signal& bvp);
std::array<double, 8> compute_eda_features(const dsp::Signal& eda);
std::array<double, 7> compute_hr_features(const dsp::Signal& hr);
std::array<double, 6> compute_temp_features(const dsp::Signal& temp);

// Consecutive non-overlapping 2 s windows over the preprocessed EEG and
// the raw peripheral channels; windows without full coverage of every
// modality are dropped and counted.
std::vector<Epoch> epoch_recording(const Recording& rec, const dsp::Signal& clean_eeg,
                                   int* dropped_coverage = nullptr);

Sample extract_sample(const Epoch& epoch, const PersonalityVector& personality);

struct PipelineReport {
  int recordings = 0;
  int recordings_failed = 0;   // preprocess failures
  int windows = 0;
  int dropped_coverage = 0;
  int dropped_features = 0;
  std::vector<std::string> errors;  // first occurrence per failure kind
};

// preprocess + epoch + feature-extract one recording; failures are
// recorded in the report instead of thrown.
std::vector<Sample> process_recording(const Recording& rec, PipelineReport& report);

// Stratified shuffle split; per-class train fraction = split_ratio within
// one sample. Throws DataError if any class has fewer than 2 samples.
Dataset assemble_dataset(std::vector<Sample> samples, double split_ratio, std::uint64_t seed);

// w_c = N_total / (K * N_c) over the dataset's class counts.
std::array<double, kNumClasses> compute_class_weights(const Dataset& ds);

}  // namespace affect::features
