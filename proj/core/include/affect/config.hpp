#pragma once

#include <map>
#include <string>

#include "affect/nn.hpp"
#include "affect/train.hpp"

namespace affect::io {

// Flat key=value config text; '#' starts a comment, keys carry section
// prefixes (model., train., data.). Map ordering keeps renders stable.
using KVMap = std::map<std::string, std::string>;

KVMap parse_config_text(const std::string& text);
std::string render_config(const KVMap& kv);
KVMap load_config_file(const std::string& path);
void save_config_file(const KVMap& kv, const std::string& path);

KVMap model_config_to_kv(const nn::ModelConfig& cfg);
nn::ModelConfig model_config_from_kv(const KVMap& kv);

KVMap train_config_to_kv(const train::TrainConfig& cfg);
train::TrainConfig train_config_from_kv(const KVMap& kv);

}  // namespace affect::io
