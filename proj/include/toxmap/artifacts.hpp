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

#ifndef TOXMAP_ARTIFACTS_HPP
#define TOXMAP_ARTIFACTS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxmap/eval.hpp"
#include "toxmap/pipeline.hpp"

namespace toxmap {

// Per-image output files:
//   <stem>.heatmap.png  16-bit grayscale, round(value * 65535)
//   <stem>.json         {"image_tox","verdict","weight_mode","scores","elements"}

std::vector<std::uint8_t> encode_heatmap_png(const Heatmap& hm);
Grid<double> decode_heatmap_png(std::span<const std::uint8_t> bytes);

nlohmann::json sidecar_json(const PipelineResult& result);

struct SidecarScore {
  std::string id;
  double tox_occluded = 0.0;
  double weight = 0.0;
  Mask mask;
};

struct Sidecar {
  double image_tox = 0.0;
  bool verdict = false;
  WeightMode weight_mode = WeightMode::drop;
  std::vector<SidecarScore> scores;
  std::vector<Mask> elements;
};

Sidecar parse_sidecar(const nlohmann::json& j);

std::string output_stem(const std::filesystem::path& image_path);

void write_result(const std::filesystem::path& out_dir, const std::string& stem,
                  const PipelineResult& result);

/// Loads <stem>.json and <stem>.heatmap.png; regions are recomputed from the
/// stored map at `tau`. Returns nullopt when either file is absent.
std::optional<ImagePrediction> load_prediction(const std::filesystem::path& results_dir,
                                               const std::string& image_path, double tau);

/// Box predictions file:
///   {"images":[{"path":str,"box":[x_min,y_min,x_max,y_max]|null,"image_tox":float}]}
std::map<std::string, ImagePrediction> read_box_predictions(const std::filesystem::path& path);

/// Copy of `image` with the 4-connected boundary pixels of each region painted
/// in `color`, for manual inspection of segment quality.
RgbImage boundary_preview(const RgbImage& image, std::span<const Mask> regions,
                          Rgb color = {255, 0, 0});

}  // namespace toxmap

#endif  // TOXMAP_ARTIFACTS_HPP
