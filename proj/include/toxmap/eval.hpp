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

#ifndef TOXMAP_EVAL_HPP
#define TOXMAP_EVAL_HPP

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "toxmap/fusion.hpp"

namespace toxmap {

struct ManifestElement {
  std::string name;
  Mask mask;
};

struct ManifestImage {
  std::string path;
  bool harmful = false;
  std::string category;
  std::vector<ManifestElement> elements;
};

struct DatasetManifest {
  std::vector<ManifestImage> images;
  nlohmann::json metadata = nlohmann::json::object();  // optional, free-form

  // Throws InvalidGroundTruth.
  void validate() const;
};

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
// Throws ProtocolError on schema violations, InvalidGroundTruth on
// inconsistent annotations.
DatasetManifest manifest_from_json(const nlohmann::json& j);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// At least half of the element's pixels reach tau on the normalised map.
bool element_detected(const Mask& gt, const Grid<double>& normalized, double tau);
bool element_detected(const Mask& gt, const Heatmap& hm, double tau);

struct RegionCounts {
  int tp = 0;
  int total = 0;
};

/// A region is a true positive when at least half of its own pixels fall
/// inside the ground-truth union.
RegionCounts region_precision(std::span<const Mask> predicted, const Mask& gt_union);

/// IoU of the box with the element's tight bbox strictly above 0.5.
bool bbox_detected(const Box& pred, const Mask& gt);

enum class BboxType { type1 = 1, type2 = 2, type3 = 3, type4 = 4 };

/// Type1: no element marked. Type2: some marked. Type3: all marked and the box
/// exceeds 80% of the image. Type4: all marked otherwise. An element counts
/// as marked when the box covers at least half of its pixels.
BboxType classify_bbox_type(const Box& pred, std::span<const Mask> gt_elements, int img_w,
                            int img_h);

/// Fraction of benign image toxicities above 0.5. Throws EmptyBenignSet.
double compute_fpr(std::span<const double> image_toxes);

enum class EvalMode { mask, bbox };

// Everything the report needs from one processed image.
struct ImagePrediction {
  double image_tox = 0.0;
  Grid<double> normalized;             // mask mode
  std::vector<Mask> regions;           // mask mode: predicted regions
  std::optional<Box> box;              // bbox mode
};

ImagePrediction prediction_from_heatmap(const Heatmap& hm, double tau);

struct MetricCounts {
  int gt_elements = 0;
  int detected = 0;
  int predicted_regions = 0;
  int tp_regions = 0;
  int images_without_predictions = 0;  // excluded from precision
  int benign_total = 0;
  int false_positives = 0;
  std::array<int, 4> bbox_types{};

  std::optional<double> recall() const;
  std::optional<double> precision() const;
  std::optional<double> fpr() const;
};

struct EvalReport {
  EvalMode mode = EvalMode::mask;
  double tau = 0.5;
  std::map<std::string, MetricCounts> per_category;
  MetricCounts overall;  // pooled counts
};

/// Throws IncompleteRun when a manifest image has no prediction.
EvalReport build_report(const DatasetManifest& manifest,
                        const std::map<std::string, ImagePrediction>& predictions, EvalMode mode,
                        double tau = 0.5);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace toxmap

#endif  // TOXMAP_EVAL_HPP
