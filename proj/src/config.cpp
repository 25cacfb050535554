// Copyright 2026 The toxmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toxmap/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace toxmap {
namespace {

constexpr std::array<const char*, 17> kFields{
    "segmenter_url", "scorer_url",     "k",
    "iou_merge_threshold", "centrality_mode", "weight_mode",
    "tau",           "epsilon",        "fill_color",
    "out_dir",       "policy_prompt_path", "positive_token",
    "negative_token", "backend_timeout_secs", "workers",
    "score_workers", "merge"};

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid value '" + text + "' for " + field);
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + field);
}

}  // namespace

std::span<const char* const> run_config_fields() { return kFields; }

std::string env_var_name(const std::string& field) {
  std::string name = "TOXMAP_";
  for (char c : field) name += char(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

std::string flag_name(const std::string& field) {
  std::string name = field;
  for (char& c : name)
    if (c == '_') c = '-';
  return name;
}

Rgb parse_rgb(const std::string& text) {
  std::array<int, 3> parts{};
  std::istringstream in(text);
  std::string piece;
  std::size_t n = 0;
  while (std::getline(in, piece, ',')) {
    if (n == 3) throw ConfigError("colour needs three components: '" + text + "'");
    const int v = parse_number<int>("fill_color", piece);
    if (v < 0 || v > 255) throw ConfigError("colour component out of range: '" + text + "'");
    parts[n++] = v;
  }
  if (n != 3) throw ConfigError("colour needs three components: '" + text + "'");
  return {std::uint8_t(parts[0]), std::uint8_t(parts[1]), std::uint8_t(parts[2])};
}

ConfigLayer layer_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  ConfigLayer layer;
  for (const auto& [key, value] : j.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end())
      throw ConfigError("unknown config key '" + key + "'");
    if (value.is_string()) {
      layer[key] = value.get<std::string>();
    } else if (value.is_boolean()) {
      layer[key] = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer()) {
      layer[key] = std::to_string(value.get<std::int64_t>());
    } else if (value.is_number()) {
      std::ostringstream out;
      out.precision(17);
      out << value.get<double>();
      layer[key] = out.str();
    } else if (value.is_array() && value.size() == 3) {
      layer[key] = std::to_string(value[0].get<int>()) + "," + std::to_string(value[1].get<int>()) +
                   "," + std::to_string(value[2].get<int>());
    } else {
      throw ConfigError("unsupported value for config key '" + key + "'");
    }
  }
  return layer;
}

ConfigLayer layer_from_env(
    const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  ConfigLayer layer;
  for (const char* field : kFields)
    if (auto v = lookup(env_var_name(field))) layer[field] = *v;
  return layer;
}

ConfigLayer layer_from_process_env() {
  return layer_from_env([](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  });
}

void apply_field(RunConfig& cfg, const std::string& field, const std::string& value) {
  if (field == "segmenter_url") cfg.segmenter_url = value;
  else if (field == "scorer_url") cfg.scorer_url = value;
  else if (field == "k") cfg.k = parse_number<int>(field, value);
  else if (field == "iou_merge_threshold") cfg.iou_merge_threshold = parse_number<double>(field, value);
  else if (field == "centrality_mode") cfg.centrality_mode = parse_centrality_mode(value);
  else if (field == "weight_mode") cfg.weight_mode = parse_weight_mode(value);
  else if (field == "tau") cfg.tau = parse_number<double>(field, value);
  else if (field == "epsilon") cfg.epsilon = parse_number<double>(field, value);
  else if (field == "fill_color") cfg.fill_color = parse_rgb(value);
  else if (field == "out_dir") cfg.out_dir = value;
  else if (field == "policy_prompt_path") cfg.policy_prompt_path = value;
  else if (field == "positive_token") cfg.positive_token = value;
  else if (field == "negative_token") cfg.negative_token = value;
  else if (field == "backend_timeout_secs") cfg.backend_timeout_secs = parse_number<double>(field, value);
  else if (field == "workers") cfg.workers = parse_number<int>(field, value);
  else if (field == "score_workers") cfg.score_workers = parse_number<int>(field, value);
  else if (field == "merge") cfg.merge = parse_bool(field, value);
  else throw ConfigError("unknown config field '" + field + "'");
}

void RunConfig::validate() const {
  SelectionConfig{iou_merge_threshold, k, centrality_mode}.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(backend_timeout_secs > 0.0)) throw ConfigError("backend_timeout_secs must be positive");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (score_workers < 1) throw ConfigError("score_workers must be >= 1");
  if (positive_token.empty() || negative_token.empty())
    throw ConfigError("token labels may not be empty");
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig p;
  p.selection = {iou_merge_threshold, k, centrality_mode};
  p.weight_mode = weight_mode;
  p.tau = tau;
  p.epsilon = epsilon;
  p.fill = fill_color;
  p.merge = merge;
  p.score_workers = score_workers;
  if (!policy_prompt_path.empty()) {
    std::ifstream in(policy_prompt_path);
    if (!in) throw ConfigError("cannot read policy prompt " + policy_prompt_path);
    std::ostringstream text;
    text << in.rdbuf();
    p.prompt.text = text.str();
  }
  p.prompt.positive_token = positive_token;
  p.prompt.negative_token = negative_token;
  p.validate();
  return p;
}

RunConfig resolve_run_config(const ConfigLayer& file, const ConfigLayer& env,
                             const ConfigLayer& flags) {
  RunConfig cfg;
  for (const ConfigLayer* layer : {&file, &env, &flags})
    for (const auto& [field, value] : *layer) apply_field(cfg, field, value);
  if (cfg.workers == 0) cfg.workers = int(std::max(1u, std::thread::hardware_concurrency()));
  cfg.validate();
  return cfg;
}

}  // namespace toxmap
