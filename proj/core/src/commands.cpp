#include "affect/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "affect/analysis.hpp"
#include "affect/checkpoint.hpp"
#include "affect/dataset_io.hpp"
#include "affect/errors.hpp"
#include "affect/stats.hpp"
#include "affect/synth.hpp"
#include "io_util.hpp"

namespace affect::cli {

namespace fs = std::filesystem;

namespace {

void say(bool quiet, const std::string& line) {
  if (!quiet) std::printf("%s\n", line.c_str());
}

features::Split split_from_name(const std::string& name) {
  if (name == "train") return features::Split::Train;
  if (name == "test") return features::Split::Test;
  throw UsageError("unknown split '" + name + "' (expected train or test)");
}

nlohmann::json pipeline_report_json(const features::PipelineReport& report) {
  nlohmann::json j;
  j["recordings"] = report.recordings;
  j["recordings_failed"] = report.recordings_failed;
  j["windows"] = report.windows;
  j["dropped_coverage"] = report.dropped_coverage;
  j["dropped_features"] = report.dropped_features;
  j["errors"] = report.errors;
  return j;
}

}  // namespace

int run_command(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

std::string default_report_dir() {
  const char* env = std::getenv("AFFECT_REPORT_DIR");
  return env && *env ? env : ".";
}

void cmd_synth(const SynthOptions& opt) {
  if (opt.out_dir.empty()) throw UsageError("synth: --out is required");
  if (opt.per_class < 2) throw UsageError("synth: --per-class must be >= 2");

  features::SynthConfig cfg = features::SynthConfig::uniform(opt.per_class, opt.noise, opt.seed);
  cfg.subjects = opt.subjects;
  cfg.duration_s = opt.duration_s;
  features::SynthGenerator gen(cfg);

  features::PipelineReport report;
  std::vector<features::Sample> samples;
  std::vector<features::Recording> used;
  const int epochs_per_session = static_cast<int>(cfg.duration_s) / features::kEpochSeconds;
  const int sessions_needed = (opt.per_class + epochs_per_session - 1) / epochs_per_session;
  for (int c = 0; c < features::kNumClasses; ++c) {
    int collected = 0;
    int attempt = 0;
    const int max_attempts = sessions_needed * 3 + 8;
    while (collected < opt.per_class) {
      if (attempt >= max_attempts) {
        throw NumericError("synth: class " + features::emotion_names()[static_cast<std::size_t>(c)] +
                           " failed to yield enough valid epochs");
      }
      features::Recording rec = gen.make(c, attempt++);
      std::vector<features::Sample> got = features::process_recording(rec, report);
      for (features::Sample& s : got) {
        if (collected >= opt.per_class) break;
        samples.push_back(std::move(s));
        ++collected;
      }
      if (!got.empty() && !opt.raw_out.empty()) used.push_back(std::move(rec));
    }
  }

  features::Dataset ds = features::assemble_dataset(std::move(samples), 0.8, opt.seed);
  io::save_dataset(ds, opt.out_dir, opt.seed);
  if (!opt.raw_out.empty()) io::save_recordings(used, opt.raw_out);

  say(opt.quiet, "dataset written to " + opt.out_dir);
  for (int c = 0; c < features::kNumClasses; ++c) {
    say(opt.quiet, "  " + features::emotion_names()[static_cast<std::size_t>(c)] + ": " +
                       std::to_string(ds.class_counts[static_cast<std::size_t>(c)]));
  }
  say(opt.quiet, "  dropped: coverage=" + std::to_string(report.dropped_coverage) +
                     " features=" + std::to_string(report.dropped_features) +
                     " preprocess=" + std::to_string(report.recordings_failed));
}

void cmd_preprocess(const PreprocessOptions& opt) {
  if (opt.raw_dir.empty() || opt.out_dir.empty()) {
    throw UsageError("preprocess: --raw and --out are required");
  }

  std::vector<std::string> file_errors;
  std::vector<features::Recording> recordings;
  {
    std::size_t n;
    try {
      n = io::recording_count(opt.raw_dir);
    } catch (const std::exception& e) {
      throw DataError("preprocess: " + std::string(e.what()));
    }
    char name[32];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(name, sizeof(name), "rec_%05zu", i);
      try {
        recordings.push_back(io::load_recording(opt.raw_dir, static_cast<int>(i)));
      } catch (const std::exception& e) {
        file_errors.push_back(std::string(name) + ": " + e.what());
      }
    }
  }
  if (recordings.empty()) {
    std::string msg = "preprocess: no readable recordings";
    for (const auto& e : file_errors) msg += "\n  " + e;
    throw DataError(msg);
  }

  features::PipelineReport report;
  std::vector<features::Sample> samples;
  for (const features::Recording& rec : recordings) {
    std::vector<features::Sample> got = features::process_recording(rec, report);
    for (features::Sample& s : got) samples.push_back(std::move(s));
  }

  features::Dataset ds = features::assemble_dataset(std::move(samples), opt.split_ratio, opt.seed);
  io::save_dataset(ds, opt.out_dir, opt.seed);

  nlohmann::json j = pipeline_report_json(report);
  j["unreadable_files"] = file_errors;
  io::detail::write_text_file(opt.out_dir + "/preprocess_report.json", j.dump(2) + "\n");

  say(opt.quiet, "dataset written to " + opt.out_dir + " (" + std::to_string(ds.samples.size()) +
                     " samples; dropped coverage=" + std::to_string(report.dropped_coverage) +
                     ", features=" + std::to_string(report.dropped_features) +
                     ", preprocess=" + std::to_string(report.recordings_failed) + ")");
}

namespace {

nn::ModelConfig resolve_model_config(const TrainOptions& opt) {
  io::KVMap kv;
  if (!opt.config_file.empty()) kv = io::load_config_file(opt.config_file);
  for (const auto& [k, v] : opt.overrides) kv[k] = v;
  nn::ModelConfig cfg = io::model_config_from_kv(kv);
  if (!opt.modalities.empty()) {
    cfg.modality_mask = 0;
    for (const std::string& name : opt.modalities) {
      cfg.modality_mask |= nn::modality_bit(nn::modality_from_name(name));
    }
  }
  return cfg;
}

train::TrainConfig resolve_train_config(const TrainOptions& opt) {
  io::KVMap kv;
  if (!opt.config_file.empty()) kv = io::load_config_file(opt.config_file);
  for (const auto& [k, v] : opt.overrides) kv[k] = v;
  train::TrainConfig cfg = io::train_config_from_kv(kv);
  cfg.seed = opt.seed;
  return cfg;
}

}  // namespace

void cmd_train(const TrainOptions& opt) {
  if (opt.dataset_dir.empty() || opt.out_dir.empty()) {
    throw UsageError("train: --data and --out are required");
  }

  // validate the configuration before touching the data
  nn::ModelConfig model_cfg = resolve_model_config(opt);
  train::TrainConfig train_cfg = resolve_train_config(opt);
  model_cfg.validate();
  train_cfg.validate();

  features::Dataset ds = io::load_dataset(opt.dataset_dir);
  if (train_cfg.class_weights.empty()) {
    const auto w = features::compute_class_weights(ds);
    train_cfg.class_weights.assign(w.begin(), w.end());
    if (model_cfg.n_classes != features::kNumClasses) {
      train_cfg.class_weights.assign(static_cast<std::size_t>(model_cfg.n_classes), 1.0);
    }
  }

  nn::Model model(model_cfg, train_cfg.seed);
  train::TrainResult result = train::train_loop(model, ds, train_cfg);
  train::restore_state(model, result.best_state);

  fs::create_directories(opt.out_dir);
  io::save_checkpoint(model.state(), opt.out_dir + "/checkpoint.ckpt");
  io::detail::write_text_file(opt.out_dir + "/history.csv", train::history_csv(result.history));

  io::KVMap cfg_out = io::model_config_to_kv(model_cfg);
  for (const auto& [k, v] : io::train_config_to_kv(train_cfg)) cfg_out[k] = v;
  io::save_config_file(cfg_out, opt.out_dir + "/model.cfg");

  train::EvalResult eval = train::evaluate(model, ds, features::Split::Test);
  train::MetricsReport metrics = train::compute_metrics(eval.probs, eval.labels, model_cfg.n_classes);
  const std::vector<std::string> names(features::emotion_names().begin(), features::emotion_names().end());
  io::detail::write_text_file(opt.out_dir + "/metrics.json",
                              metrics.to_json(model_cfg.n_classes == features::kNumClasses
                                                  ? names
                                                  : std::vector<std::string>{}));

  say(opt.quiet, "best epoch " + std::to_string(result.best_epoch) + " (macro F1 " +
                     std::to_string(result.best_macro_f1) + "), artifacts in " + opt.out_dir);
}

nn::Model load_model(const std::string& config_path, const std::string& checkpoint_path) {
  nn::ModelConfig cfg = io::model_config_from_kv(io::load_config_file(config_path));
  nn::Model model(cfg, 0);

  std::map<std::string, autograd::Tensor> archive = io::load_checkpoint(checkpoint_path);
  for (auto& [name, tensor] : model.state()) {
    auto it = archive.find(name);
    if (it == archive.end()) {
      throw DataError("checkpoint: missing tensor '" + name + "'");
    }
    if (it->second.shape() != tensor.shape()) {
      throw DataError("checkpoint: shape mismatch for '" + name + "': archive " +
                      autograd::shape_str(it->second.shape()) + " vs model " +
                      autograd::shape_str(tensor.shape()));
    }
    tensor.data() = it->second.data();
  }
  return model;
}

namespace {

std::string sibling_model_config(const std::string& checkpoint, const std::string& explicit_cfg) {
  if (!explicit_cfg.empty()) return explicit_cfg;
  return (fs::path(checkpoint).parent_path() / "model.cfg").string();
}

}  // namespace

void cmd_eval(const EvalOptions& opt) {
  if (opt.dataset_dir.empty() || opt.checkpoint.empty()) {
    throw UsageError("eval: --data and --checkpoint are required");
  }
  nn::Model model = load_model(sibling_model_config(opt.checkpoint, opt.model_config), opt.checkpoint);
  features::Dataset ds = io::load_dataset(opt.dataset_dir);

  train::EvalResult eval = train::evaluate(model, ds, split_from_name(opt.split));
  train::MetricsReport metrics =
      train::compute_metrics(eval.probs, eval.labels, model.config().n_classes);

  const std::vector<std::string> names(features::emotion_names().begin(), features::emotion_names().end());
  const std::string json = metrics.to_json(
      model.config().n_classes == features::kNumClasses ? names : std::vector<std::string>{});
  const std::string path = opt.report_path.empty()
                               ? (fs::path(default_report_dir()) / "metrics.json").string()
                               : opt.report_path;
  io::detail::write_text_file(path, json);
  say(opt.quiet, "accuracy " + std::to_string(metrics.accuracy) + ", macro F1 " +
                     std::to_string(metrics.macro_f1) + " -> " + path);
}

void cmd_analyze(const AnalyzeOptions& opt) {
  if (opt.dataset_dir.empty() || opt.checkpoint.empty()) {
    throw UsageError("analyze: --data and --checkpoint are required");
  }
  const std::vector<std::string> known = {"attention", "dynamics", "calibration",
                                          "bootstrap", "separability"};
  std::vector<std::string> which;
  if (opt.which == "all") {
    which = known;
  } else if (std::find(known.begin(), known.end(), opt.which) != known.end()) {
    which = {opt.which};
  } else {
    throw UsageError("analyze: unknown analysis '" + opt.which + "'");
  }

  nn::Model model = load_model(sibling_model_config(opt.checkpoint, opt.model_config), opt.checkpoint);
  features::Dataset ds = io::load_dataset(opt.dataset_dir);
  const std::string out_dir = opt.out_dir.empty() ? default_report_dir() : opt.out_dir;
  fs::create_directories(out_dir);

  const auto& names = features::emotion_names();
  for (const std::string& what : which) {
    if (what == "attention") {
      analysis::AttentionProfile profile =
          analysis::attention_profiles(model, ds, features::Split::Test);
      std::string csv = "emotion,timestep,weight,normalized\n";
      char buf[128];
      for (std::size_t c = 0; c < profile.mean_weights.size(); ++c) {
        for (std::size_t t = 0; t < profile.mean_weights[c].size(); ++t) {
          std::snprintf(buf, sizeof(buf), "%s,%zu,%.10g,%.10g\n", names[c].c_str(), t,
                        profile.mean_weights[c][t], profile.heatmap[c][t]);
          csv += buf;
        }
      }
      io::detail::write_text_file(out_dir + "/attention.csv", csv);
    } else if (what == "dynamics") {
      if (model.lnn().layers.empty()) throw DataError("analyze: model has no liquid layer");
      analysis::NeuronDynamics dyn = analysis::neuron_roles(model.lnn().layers[0], 3, opt.seed);
      nlohmann::json j;
      nlohmann::json neurons;
      for (std::size_t i = 0; i < dyn.tau.size(); ++i) {
        nlohmann::json e;
        e["neuron"] = i;
        e["tau"] = dyn.tau[i];
        e["memory_dominance"] = std::isnan(dyn.md[i]) ? nlohmann::json() : nlohmann::json(dyn.md[i]);
        e["role"] = dyn.table[static_cast<std::size_t>(dyn.role[i])].name;
        neurons.push_back(e);
      }
      j["neurons"] = neurons;
      nlohmann::json roles;
      for (const auto& role : dyn.table) {
        nlohmann::json e;
        e["role"] = role.name;
        e["count"] = role.count;
        e["mean_tau"] = role.mean_tau;
        e["mean_memory_dominance"] = role.mean_md;
        roles.push_back(e);
      }
      j["roles"] = roles;
      j["degenerate"] = dyn.degenerate;
      io::detail::write_text_file(out_dir + "/dynamics.json", j.dump(2) + "\n");
    } else if (what == "calibration") {
      train::EvalResult eval = train::evaluate(model, ds, features::Split::Test);
      analysis::CalibrationReport rep = analysis::calibration(eval.probs, eval.labels);
      nlohmann::json j;
      j["ece"] = rep.ece;
      j["mce"] = rep.mce;
      j["brier"] = rep.brier;
      j["mean_confidence"] = rep.mean_confidence;
      nlohmann::json bins;
      for (const auto& b : rep.bins) {
        nlohmann::json e;
        e["confidence"] = b.confidence;
        e["accuracy"] = b.accuracy;
        e["count"] = b.count;
        bins.push_back(e);
      }
      j["bins"] = bins;
      io::detail::write_text_file(out_dir + "/calibration.json", j.dump(2) + "\n");
    } else if (what == "bootstrap") {
      train::EvalResult eval = train::evaluate(model, ds, features::Split::Test);
      std::vector<char> correct;
      for (std::size_t i = 0; i < eval.probs.size(); ++i) {
        int arg = 0;
        for (std::size_t c = 1; c < eval.probs[i].size(); ++c) {
          if (eval.probs[i][c] > eval.probs[i][static_cast<std::size_t>(arg)]) arg = static_cast<int>(c);
        }
        correct.push_back(arg == eval.labels[i] ? 1 : 0);
      }
      stats::BootstrapResult boot = stats::bootstrap_ci(correct, 1000, 0.95, opt.seed);
      nlohmann::json j;
      j["accuracy"] = boot.point;
      j["ci_low"] = boot.lo;
      j["ci_high"] = boot.hi;
      j["n_boot"] = boot.distribution.size();
      j["distribution"] = boot.distribution;
      io::detail::write_text_file(out_dir + "/bootstrap.json", j.dump(2) + "\n");
    } else if (what == "separability") {
      auto [latents, labels] = analysis::collect_latents(model, ds, features::Split::Test);
      analysis::SeparabilityReport rep = analysis::separability(latents, labels);
      nlohmann::json j;
      j["calinski_harabasz"] = std::isfinite(rep.calinski_harabasz)
                                   ? nlohmann::json(rep.calinski_harabasz)
                                   : nlohmann::json("inf");
      j["davies_bouldin"] = rep.davies_bouldin;
      j["inter_centroid_euclidean"] = rep.inter_centroid_euclidean;
      j["inter_centroid_mahalanobis"] = rep.inter_centroid_mahalanobis;
      j["ridge_applied"] = rep.ridge_applied;
      io::detail::write_text_file(out_dir + "/separability.json", j.dump(2) + "\n");
    }
  }
  say(opt.quiet, "wrote " + std::to_string(which.size()) + " report(s) to " + out_dir);
}

}  // namespace affect::cli
