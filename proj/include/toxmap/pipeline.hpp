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

#ifndef TOXMAP_PIPELINE_HPP
#define TOXMAP_PIPELINE_HPP

#include <chrono>
#include <string>
#include <vector>

#include "toxmap/fusion.hpp"
#include "toxmap/ports.hpp"
#include "toxmap/selection.hpp"

namespace toxmap {

struct PipelineConfig {
  SelectionConfig selection;
  WeightMode weight_mode = WeightMode::drop;
  double tau = 0.5;
  double epsilon = 1e-8;
  Rgb fill = kBlack;
  PolicyPrompt prompt = default_policy_prompt();
  bool merge = true;       // false skips IoU merging (ablation)
  int score_workers = 4;   // concurrent scorer calls

  void validate() const;
};

struct ScoredMask {
  std::string id;
  Mask mask;
  bool inverted = false;
  double tox_occluded = 0.0;
  double weight = 0.0;
};

struct PipelineTiming {
  std::chrono::duration<double> segment{};
  std::chrono::duration<double> select{};
  std::chrono::duration<double> score{};
  std::chrono::duration<double> fuse{};
};

struct PipelineResult {
  Heatmap heatmap;
  std::vector<ScoredMask> scored;
  std::vector<Mask> predicted_elements;
  PipelineConfig config;
  PipelineTiming timing;
  int raw_mask_count = 0;
  int merged_mask_count = 0;
  int scorer_calls = 0;
};

/// segment -> merge -> rank -> select 2k candidates -> score the unoccluded
/// image once and every occluded candidate -> fuse -> extract elements.
///
/// Port failures surface as BackendError tagged with the failing stage. A
/// segmenter returning no masks yields a flat heatmap whose verdict comes
/// from tox(I) alone.
PipelineResult run_pipeline(const RgbImage& image, SegmenterPort& segmenter,
                            ScorerPort& scorer, const PipelineConfig& cfg);

}  // namespace toxmap

#endif  // TOXMAP_PIPELINE_HPP
