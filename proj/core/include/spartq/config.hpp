#pragma once

#include <map>
#include <string>

#include "spartq/trainer.hpp"

namespace spartq {

// Flat "key = value" text, '#' comments. Unknown keys are rejected.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Applies one key to the config; throws on unknown keys or bad values.
void apply_config_key(TrainConfig& cfg, const std::string& key, const std::string& value);

void apply_config_map(TrainConfig& cfg, const std::map<std::string, std::string>& kv);

// Fully resolved config, one key per line, parseable by parse_kv_text.
std::string serialize_config(const TrainConfig& cfg);

}  // namespace spartq
