#include "affect/config.hpp"

#include <cstdio>
#include <set>

#include "affect/errors.hpp"
#include "io_util.hpp"

namespace affect::io {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string item = trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw UsageError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& item : split_csv(v)) out.push_back(to_int(key, item));
  return out;
}

template <class F>
void take(KVMap& kv, const std::string& key, F&& f) {
  auto it = kv.find(key);
  if (it == kv.end()) return;
  f(it->second);
  kv.erase(it);
}

}  // namespace

KVMap parse_config_text(const std::string& text) {
  KVMap kv;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

std::string render_config(const KVMap& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

KVMap load_config_file(const std::string& path) {
  return parse_config_text(detail::read_text_file(path));
}

void save_config_file(const KVMap& kv, const std::string& path) {
  detail::write_text_file(path, render_config(kv));
}

KVMap model_config_to_kv(const nn::ModelConfig& cfg) {
  KVMap kv;
  kv["model.cnn_filters"] = join_ints({cfg.cnn_filters[0], cfg.cnn_filters[1], cfg.cnn_filters[2]});
  kv["model.kernel"] = std::to_string(cfg.kernel);
  kv["model.padding"] = std::to_string(cfg.padding);
  kv["model.pool_window"] = std::to_string(cfg.pool_window);
  kv["model.pool_stride"] = std::to_string(cfg.pool_stride);
  kv["model.lnn_hidden"] = std::to_string(cfg.lnn_hidden);
  kv["model.lnn_layers"] = std::to_string(cfg.lnn_layers);
  kv["model.attention_dim"] = std::to_string(cfg.attention_dim);
  kv["model.latent_dim"] = std::to_string(cfg.latent_dim);
  kv["model.ae_hidden"] = std::to_string(cfg.ae_hidden);
  kv["model.classifier_dims"] = join_ints(cfg.classifier_dims);
  kv["model.dropout"] = fmt_double(cfg.dropout);
  kv["model.eeg_channels"] = std::to_string(cfg.eeg_channels);
  kv["model.eeg_timesteps"] = std::to_string(cfg.eeg_timesteps);
  kv["model.n_classes"] = std::to_string(cfg.n_classes);

  std::string mods;
  for (nn::Modality m : nn::fusion_order()) {
    if (!cfg.has(m)) continue;
    if (!mods.empty()) mods += ",";
    mods += nn::modality_name(m);
  }
  kv["model.modalities"] = mods;
  for (nn::Modality m : nn::fusion_order()) {
    if (m == nn::Modality::RawEEG) continue;
    kv["model.encoder." + nn::modality_name(m)] =
        join_ints(cfg.encoder_dims[static_cast<std::size_t>(m)]);
  }
  return kv;
}

nn::ModelConfig model_config_from_kv(const KVMap& input) {
  nn::ModelConfig cfg;
  KVMap kv;
  for (const auto& [k, v] : input) {
    if (k.rfind("model.", 0) == 0) kv[k] = v;
  }

  take(kv, "model.cnn_filters", [&](const std::string& v) {
    const auto list = to_int_list("model.cnn_filters", v);
    if (list.size() != 3) throw UsageError("config: model.cnn_filters expects 3 entries");
    cfg.cnn_filters = {list[0], list[1], list[2]};
  });
  take(kv, "model.kernel", [&](const std::string& v) { cfg.kernel = to_int("model.kernel", v); });
  take(kv, "model.padding", [&](const std::string& v) { cfg.padding = to_int("model.padding", v); });
  take(kv, "model.pool_window", [&](const std::string& v) { cfg.pool_window = to_int("model.pool_window", v); });
  take(kv, "model.pool_stride", [&](const std::string& v) { cfg.pool_stride = to_int("model.pool_stride", v); });
  take(kv, "model.lnn_hidden", [&](const std::string& v) { cfg.lnn_hidden = to_int("model.lnn_hidden", v); });
  take(kv, "model.lnn_layers", [&](const std::string& v) { cfg.lnn_layers = to_int("model.lnn_layers", v); });
  take(kv, "model.attention_dim", [&](const std::string& v) { cfg.attention_dim = to_int("model.attention_dim", v); });
  take(kv, "model.latent_dim", [&](const std::string& v) { cfg.latent_dim = to_int("model.latent_dim", v); });
  take(kv, "model.ae_hidden", [&](const std::string& v) { cfg.ae_hidden = to_int("model.ae_hidden", v); });
  take(kv, "model.classifier_dims", [&](const std::string& v) { cfg.classifier_dims = to_int_list("model.classifier_dims", v); });
  take(kv, "model.dropout", [&](const std::string& v) { cfg.dropout = to_double("model.dropout", v); });
  take(kv, "model.eeg_channels", [&](const std::string& v) { cfg.eeg_channels = to_int("model.eeg_channels", v); });
  take(kv, "model.eeg_timesteps", [&](const std::string& v) { cfg.eeg_timesteps = to_int("model.eeg_timesteps", v); });
  take(kv, "model.n_classes", [&](const std::string& v) { cfg.n_classes = to_int("model.n_classes", v); });
  take(kv, "model.modalities", [&](const std::string& v) {
    cfg.modality_mask = 0;
    for (const std::string& name : split_csv(v)) {
      cfg.modality_mask |= nn::modality_bit(nn::modality_from_name(name));
    }
  });
  for (nn::Modality m : nn::fusion_order()) {
    if (m == nn::Modality::RawEEG) continue;
    take(kv, "model.encoder." + nn::modality_name(m), [&](const std::string& v) {
      cfg.encoder_dims[static_cast<std::size_t>(m)] =
          to_int_list("model.encoder." + nn::modality_name(m), v);
    });
  }

  if (!kv.empty()) throw UsageError("config: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

KVMap train_config_to_kv(const train::TrainConfig& cfg) {
  KVMap kv;
  kv["train.lr"] = fmt_double(cfg.lr);
  kv["train.batch_size"] = std::to_string(cfg.batch_size);
  kv["train.epochs"] = std::to_string(cfg.epochs);
  kv["train.warmup_epochs"] = std::to_string(cfg.warmup_epochs);
  kv["train.weight_decay"] = fmt_double(cfg.weight_decay);
  kv["train.grad_clip"] = fmt_double(cfg.grad_clip);
  kv["train.label_smoothing"] = fmt_double(cfg.label_smoothing);
  kv["train.lambda0"] = fmt_double(cfg.lambda0);
  kv["train.patience"] = std::to_string(cfg.patience);
  kv["train.seed"] = std::to_string(cfg.seed);
  std::string weights;
  for (std::size_t i = 0; i < cfg.class_weights.size(); ++i) {
    if (i) weights += ",";
    weights += fmt_double(cfg.class_weights[i]);
  }
  kv["train.class_weights"] = weights;
  return kv;
}

train::TrainConfig train_config_from_kv(const KVMap& input) {
  train::TrainConfig cfg;
  KVMap kv;
  for (const auto& [k, v] : input) {
    if (k.rfind("train.", 0) == 0) kv[k] = v;
  }
  take(kv, "train.lr", [&](const std::string& v) { cfg.lr = to_double("train.lr", v); });
  take(kv, "train.batch_size", [&](const std::string& v) { cfg.batch_size = to_int("train.batch_size", v); });
  take(kv, "train.epochs", [&](const std::string& v) { cfg.epochs = to_int("train.epochs", v); });
  take(kv, "train.warmup_epochs", [&](const std::string& v) { cfg.warmup_epochs = to_int("train.warmup_epochs", v); });
  take(kv, "train.weight_decay", [&](const std::string& v) { cfg.weight_decay = to_double("train.weight_decay", v); });
  take(kv, "train.grad_clip", [&](const std::string& v) { cfg.grad_clip = to_double("train.grad_clip", v); });
  take(kv, "train.label_smoothing", [&](const std::string& v) { cfg.label_smoothing = to_double("train.label_smoothing", v); });
  take(kv, "train.lambda0", [&](const std::string& v) { cfg.lambda0 = to_double("train.lambda0", v); });
  take(kv, "train.patience", [&](const std::string& v) { cfg.patience = to_int("train.patience", v); });
  take(kv, "train.seed", [&](const std::string& v) {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(v));
  });
  take(kv, "train.class_weights", [&](const std::string& v) {
    cfg.class_weights.clear();
    for (const std::string& item : split_csv(v)) {
      cfg.class_weights.push_back(to_double("train.class_weights", item));
    }
  });
  if (!kv.empty()) throw UsageError("config: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

}  // namespace affect::io
