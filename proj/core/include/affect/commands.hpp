#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "affect/config.hpp"
#include "affect/nn.hpp"
#include "affect/train.hpp"

namespace affect::cli {

// Exit codes: 0 success, 1 usage, 2 data, 3 numeric failure.
int run_command(const std::function<void()>& fn);

struct SynthOptions {
  std::string out_dir;
  int per_class = 100;
  double noise = 0.2;
  std::uint64_t seed = 0;
  int subjects = 10;
  double duration_s = 32.0;  // session length; epochs per session = duration/2
  std::string raw_out;       // also dump the raw recordings when non-empty
  bool quiet = false;
};
void cmd_synth(const SynthOptions& opt);

struct PreprocessOptions {
  std::string raw_dir;
  std::string out_dir;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;
  bool quiet = false;
};
void cmd_preprocess(const PreprocessOptions& opt);

struct TrainOptions {
  std::string dataset_dir;
  std::string out_dir;
  std::string config_file;            // optional key=value file
  io::KVMap overrides;                // CLI-level key overrides
  std::vector<std::string> modalities;  // empty = config default
  std::uint64_t seed = 0;
  bool quiet = false;
};
void cmd_train(const TrainOptions& opt);

struct EvalOptions {
  std::string dataset_dir;
  std::string checkpoint;
  std::string model_config;  // default: model.cfg next to the checkpoint
  std::string report_path;   // default: metrics.json under the report dir
  std::string split = "test";
  bool quiet = false;
};
void cmd_eval(const EvalOptions& opt);

struct AnalyzeOptions {
  std::string dataset_dir;
  std::string checkpoint;
  std::string model_config;
  std::string out_dir;  // default: AFFECT_REPORT_DIR or "."
  std::string which = "all";
  std::uint64_t seed = 0;
  bool quiet = false;
};
void cmd_analyze(const AnalyzeOptions& opt);

// Rebuilds a model from a key=value config and a checkpoint archive.
nn::Model load_model(const std::string& config_path, const std::string& checkpoint_path);

// Default report directory: $AFFECT_REPORT_DIR if set, else ".".
std::string default_report_dir();

}  // namespace affect::cli
