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

#include "toxmap/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace toxmap {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

bool boxes_overlap(const Box& a, const Box& b) {
  return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max &&
         b.y_min <= a.y_max;
}

// Descending area, then ascending first pixel, then lexicographic runs.
bool mask_order(const Mask& a, const Mask& b) {
  if (a.area() != b.area()) return a.area() > b.area();
  if (a.first_pixel() != b.first_pixel()) return a.first_pixel() < b.first_pixel();
  return a.runs() < b.runs();
}

const double kMaxProximity = std::sqrt(0.5);

}  // namespace

std::string_view to_string(CentralityMode mode) {
  return mode == CentralityMode::inverted_distance ? "inverted-distance"
                                                   : "raw-distance";
}

CentralityMode parse_centrality_mode(std::string_view text) {
  if (text == "inverted-distance" || text == "inverted_distance")
    return CentralityMode::inverted_distance;
  if (text == "raw-distance" || text == "raw_distance")
    return CentralityMode::raw_distance;
  throw ConfigError("unknown centrality mode '" + std::string(text) + "'");
}

void SelectionConfig::validate() const {
  if (!(iou_merge_threshold > 0.0 && iou_merge_threshold <= 1.0))
    throw ConfigError("iou_merge_threshold must lie in (0, 1]");
  if (k < 1) throw ConfigError("k must be >= 1");
}

namespace {

// One union-find pass over the IoU graph of `masks`.
std::vector<Mask> merge_pass(std::span<const Mask> masks, double threshold) {
  std::vector<std::optional<Box>> boxes;
  boxes.reserve(masks.size());
  for (const Mask& m : masks)
    boxes.push_back(m.is_empty() ? std::nullopt
                                 : std::optional<Box>(geometry(m).bbox));

  // All edges are collected before any union so the result does not depend
  // on visiting order.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::size_t j = i + 1; j < masks.size(); ++j) {
      if (!boxes[i] || !boxes[j] || !boxes_overlap(*boxes[i], *boxes[j]))
        continue;
      if (iou(masks[i], masks[j]) > threshold) edges.emplace_back(i, j);
    }
  }
  DisjointSets sets(masks.size());
  for (auto [i, j] : edges) sets.unite(i, j);

  std::vector<std::vector<Mask>> groups(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i)
    groups[sets.find(i)].push_back(masks[i]);

  std::vector<Mask> merged;
  for (auto& group : groups) {
    if (group.empty()) continue;
    merged.push_back(group.size() == 1 ? group.front() : mask_union(group));
  }
  return merged;
}

}  // namespace

std::vector<Mask> merge_masks(std::span<const Mask> masks,
                              const SelectionConfig& cfg) {
  if (masks.empty()) return {};
  for (const Mask& m : masks) require_same_dims(masks.front(), m);
  // Unions of components can overlap each other above the threshold, so
  // passes repeat until no pair of outputs does; every extra pass shrinks
  // the list.
  std::vector<Mask> merged = merge_pass(masks, cfg.iou_merge_threshold);
  for (std::size_t before = masks.size(); merged.size() < before;) {
    before = merged.size();
    merged = merge_pass(merged, cfg.iou_merge_threshold);
  }
  std::sort(merged.begin(), merged.end(), mask_order);
  return merged;
}

double proximity(const MaskGeometry& geom, int img_w, int img_h) {
  const double cx = 0.5 * (img_w - 1);
  const double cy = 0.5 * (img_h - 1);
  const double dx = (geom.centroid_x - cx) / img_w;
  const double dy = (geom.centroid_y - cy) / img_h;
  return std::sqrt(dx * dx + dy * dy);
}

double centrality_from_proximity(double p) {
  return std::clamp(1.0 - p / kMaxProximity, 0.0, 1.0);
}

std::vector<RankedMask> rank_masks(std::span<const Mask> masks,
                                   const SelectionConfig& cfg, int img_w,
                                   int img_h) {
  std::vector<RankedMask> ranked;
  ranked.reserve(masks.size());
  for (const Mask& m : masks) {
    const MaskGeometry g = geometry(m);
    RankedMask r{m};
    r.proximity_p = proximity(g, img_w, img_h);
    r.centrality = centrality_from_proximity(r.proximity_p);
    r.area_a = g.area_ratio;
    r.confidence_c = m.confidence();
    const double position = cfg.centrality_mode == CentralityMode::inverted_distance
                                ? r.centrality
                                : r.proximity_p;
    r.score = position * r.area_a * r.confidence_c;
    ranked.push_back(std::move(r));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedMask& a, const RankedMask& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return mask_order(a.mask, b.mask);
                   });
  return ranked;
}

CandidateSet select_candidates(std::span<const RankedMask> ranked,
                               const SelectionConfig& cfg) {
  CandidateSet set;
  set.k_effective = int(std::min<std::size_t>(std::size_t(cfg.k), ranked.size()));
  set.candidates.reserve(std::size_t(2 * set.k_effective));
  for (int i = 0; i < set.k_effective; ++i)
    set.candidates.push_back(
        {"m" + std::to_string(i), ranked[std::size_t(i)].mask, false, i});
  for (int i = 0; i < set.k_effective; ++i)
    set.candidates.push_back({"m" + std::to_string(i) + "-inv",
                              invert(ranked[std::size_t(i)].mask), true, i});
  return set;
}

}  // namespace toxmap
