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

#ifndef TOXMAP_CONFIG_HPP
#define TOXMAP_CONFIG_HPP

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "toxmap/pipeline.hpp"

namespace toxmap {

// Operator configuration for `toxmap run`. Each field can be set from a
// JSON config file (key == field name), an environment variable
// (TOXMAP_<FIELD>, upper case) or a flag (--field-name); flags win over
// the environment, which wins over the file.
struct RunConfig {
  std::string segmenter_url;
  std::string scorer_url;
  int k = 5;
  double iou_merge_threshold = 0.5;
  CentralityMode centrality_mode = CentralityMode::inverted_distance;
  WeightMode weight_mode = WeightMode::drop;
  double tau = 0.5;
  double epsilon = 1e-8;
  Rgb fill_color = kBlack;
  std::string out_dir = "out";
  std::string policy_prompt_path;  // empty: built-in policy
  std::string positive_token = "1";
  std::string negative_token = "0";
  double backend_timeout_secs = 60.0;
  int workers = 0;        // images in flight; 0 = CPU count
  int score_workers = 4;  // scorer calls in flight per image
  bool merge = true;

  // Throws ConfigError.
  void validate() const;
  // Reads the policy file when one is configured.
  PipelineConfig pipeline_config() const;
};

// Raw string values keyed by field name.
using ConfigLayer = std::map<std::string, std::string>;

std::span<const char* const> run_config_fields();
std::string env_var_name(const std::string& field);
std::string flag_name(const std::string& field);

ConfigLayer layer_from_json(const nlohmann::json& j);
ConfigLayer layer_from_env(const std::function<std::optional<std::string>(const std::string&)>& lookup);
ConfigLayer layer_from_process_env();

void apply_field(RunConfig& cfg, const std::string& field, const std::string& value);

/// defaults < file < env < flags, then validate().
RunConfig resolve_run_config(const ConfigLayer& file, const ConfigLayer& env,
                             const ConfigLayer& flags);

Rgb parse_rgb(const std::string& text);

}  // namespace toxmap

#endif  // TOXMAP_CONFIG_HPP
