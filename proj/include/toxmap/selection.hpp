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

#ifndef TOXMAP_SELECTION_HPP
#define TOXMAP_SELECTION_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toxmap/mask.hpp"

namespace toxmap {

// inverted_distance rewards central masks (centrality = 1 - P / sqrt(0.5));
// raw_distance multiplies by the centre distance P itself.
enum class CentralityMode { inverted_distance, raw_distance };

std::string_view to_string(CentralityMode mode);
CentralityMode parse_centrality_mode(std::string_view text);

struct SelectionConfig {
  double iou_merge_threshold = 0.5;
  int k = 5;
  CentralityMode centrality_mode = CentralityMode::inverted_distance;

  // Throws ConfigError.
  void validate() const;
};

struct RankedMask {
  Mask mask;
  double proximity_p = 0.0;
  double centrality = 0.0;
  double area_a = 0.0;
  double confidence_c = 0.0;
  double score = 0.0;
};

struct Candidate {
  std::string id;
  Mask mask;
  bool inverted = false;
  int rank = 0;  // position of the source mask in the ranking
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  int k_effective = 0;
};

/// Merges every connected component of the graph whose edges join masks with
/// pairwise IoU above the threshold, first on the original masks and then on
/// the merged masks until no two outputs exceed the threshold. Output is
/// ordered by descending area, then first pixel.
std::vector<Mask> merge_masks(std::span<const Mask> masks,
                              const SelectionConfig& cfg);

/// Distance of the bbox centre from the image centre ((W-1)/2, (H-1)/2),
/// each axis normalised by the image extent.
double proximity(const MaskGeometry& geom, int img_w, int img_h);

/// 1 - P / sqrt(0.5), clamped to [0, 1]; sqrt(0.5) bounds P for centroids
/// inside the image.
double centrality_from_proximity(double p);

/// Scores masks by centrality (or raw distance) x area ratio x confidence and
/// sorts by descending score, then area, then first pixel.
std::vector<RankedMask> rank_masks(std::span<const Mask> masks,
                                   const SelectionConfig& cfg, int img_w,
                                   int img_h);

/// Top-min(k, n) masks followed by their inversions, in rank order.
CandidateSet select_candidates(std::span<const RankedMask> ranked,
                               const SelectionConfig& cfg);

}  // namespace toxmap

#endif  // TOXMAP_SELECTION_HPP
