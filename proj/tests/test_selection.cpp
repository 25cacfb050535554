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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "toxmap/selection.hpp"

using namespace toxmap;
using namespace toxmap::testing;

namespace {

SelectionConfig defaults() { return SelectionConfig{}; }

std::vector<Mask> random_mask_set(std::mt19937_64& rng, int w, int h, int n) {
  std::vector<Mask> out;
  for (int i = 0; i < n; ++i) {
    const int x0 = uniform_int(rng, 0, w - 1), x1 = uniform_int(rng, x0, w - 1);
    const int y0 = uniform_int(rng, 0, h - 1), y1 = uniform_int(rng, y0, h - 1);
    out.push_back(rect_mask(w, h, x0, y0, x1, y1, uniform_real(rng, 0.05, 1.0)));
  }
  return out;
}

}  // namespace

TEST_CASE("merge examples") {
  const Mask a = rect_mask(10, 10, 0, 0, 4, 4);
  const auto same = merge_masks(std::vector<Mask>{a, a}, defaults());
  REQUIRE(same.size() == 1);
  CHECK(same[0].same_support(a));

  const std::vector<Mask> disjoint{rect_mask(10, 10, 0, 0, 1, 1), rect_mask(10, 10, 4, 4, 5, 5),
                                   rect_mask(10, 10, 8, 8, 9, 9)};
  const auto kept = merge_masks(disjoint, defaults());
  CHECK(kept.size() == 3);

  CHECK(merge_masks(std::vector<Mask>{}, defaults()).empty());
  CHECK_THROWS_AS(merge_masks(std::vector<Mask>{a, Mask::empty(9, 10)}, defaults()), DimensionError);
}

TEST_CASE("merge is transitive over the IoU graph") {
  // 1 x 20 strip: A=[0,9], B=[2,11], C=[4,13]... build exact IoUs instead.
  // A = cols 0..9 (10), B = cols 3..12 (10): inter 7, union 13 -> 0.538.
  // C = cols 6..15: B-C inter 7/13 = 0.538, A-C inter 4/16 = 0.25.
  const Mask a = columns_mask(20, 1, 0, 9);
  const Mask b = columns_mask(20, 1, 3, 12);
  const Mask c = columns_mask(20, 1, 6, 15);
  REQUIRE(iou(a, b) > 0.5);
  REQUIRE(iou(b, c) > 0.5);
  REQUIRE(iou(a, c) < 0.5);
  const auto merged = merge_masks(std::vector<Mask>{a, c, b}, defaults());
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].same_support(columns_mask(20, 1, 0, 15)));
}

TEST_CASE("merge repeats until no output pair exceeds the threshold") {
  // A-B merge at 0.6; C sits at exactly 0.5 with both, but 0.625 with A | B.
  const Mask a = columns_mask(12, 1, 0, 3);
  const Mask b = columns_mask(12, 1, 1, 4);
  const Mask c = columns_mask(12, 1, 0, 7);
  REQUIRE(iou(a, c) == 0.5);
  REQUIRE(iou(b, c) == 0.5);
  const auto merged = merge_masks(std::vector<Mask>{a, b, c}, defaults());
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].same_support(c));
  CHECK(merge_masks(merged, defaults()) == merged);
}

TEST_CASE("merge with IoU 0.6 chain from the worked example") {
  // On 1 x 100 strips: A = [0,79], B = [10,89] -> 70/90; use exact 0.6 pairs:
  // A=[0,59] B=[15,74]: inter 45, union 75 -> 0.6. C=[30,89]: B-C 45/75 = 0.6, A-C 30/90.
  const Mask a = columns_mask(100, 1, 0, 59);
  const Mask b = columns_mask(100, 1, 15, 74);
  const Mask c = columns_mask(100, 1, 30, 89);
  CHECK(iou(a, b) == doctest::Approx(0.6));
  CHECK(iou(b, c) == doctest::Approx(0.6));
  CHECK(iou(a, c) == doctest::Approx(1.0 / 3.0));
  const auto merged = merge_masks(std::vector<Mask>{a, b, c}, defaults());
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].area() == 90);
}

TEST_CASE("merge threshold is strict") {
  // IoU exactly 0.5 does not merge: [0,5] vs [2,7] -> 4/8.
  const Mask a = columns_mask(10, 1, 0, 5);
  const Mask b = columns_mask(10, 1, 2, 7);
  REQUIRE(iou(a, b) == 0.5);
  CHECK(merge_masks(std::vector<Mask>{a, b}, defaults()).size() == 2);
}

TEST_CASE("merge output ordering") {
  const Mask small = rect_mask(10, 10, 0, 0, 0, 0);
  const Mask big = rect_mask(10, 10, 5, 5, 9, 9);
  const Mask twin_late = rect_mask(10, 10, 9, 0, 9, 0);
  const auto out = merge_masks(std::vector<Mask>{twin_late, small, big}, defaults());
  REQUIRE(out.size() == 3);
  CHECK(out[0].same_support(big));
  CHECK(out[1].same_support(small));
  CHECK(out[2].same_support(twin_late));
}

TEST_CASE("property: merge is idempotent and preserves support") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto masks = random_mask_set(rng, 24, 24, uniform_int(rng, 1, 12));
    const auto once = merge_masks(masks, defaults());
    const auto twice = merge_masks(once, defaults());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once[i].same_support(twice[i]));
    CHECK(mask_union(masks).same_support(mask_union(once)));
    // Order independence of the edge collection.
    auto shuffled = masks;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto again = merge_masks(shuffled, defaults());
    REQUIRE(again.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(again[i].same_support(once[i]));
  }
}

TEST_CASE("proximity examples") {
  MaskGeometry g;
  g.centroid_x = 50;
  g.centroid_y = 50;
  CHECK(proximity(g, 101, 101) == 0.0);
  g.centroid_x = 0;
  CHECK(proximity(g, 101, 101) == doctest::Approx(50.0 / 101.0).epsilon(1e-12));
  CHECK(proximity(g, 101, 101) == doctest::Approx(0.4950).epsilon(1e-4));
  g.centroid_y = 0;
  CHECK(proximity(g, 101, 101) == doctest::Approx(std::sqrt(2.0) * 50.0 / 101.0).epsilon(1e-12));
  CHECK(proximity(g, 101, 101) == doctest::Approx(0.7001).epsilon(1e-4));
}

TEST_CASE("rank examples") {
  // 4x4 image, rows/cols 1..2: bbox centre (1.5, 1.5) == image centre; A = 4/16.
  const Mask centered = rect_mask(4, 4, 1, 1, 2, 2, 0.8);
  SelectionConfig cfg;
  const auto inv = rank_masks(std::vector<Mask>{centered}, cfg, 4, 4);
  REQUIRE(inv.size() == 1);
  CHECK(inv[0].proximity_p == 0.0);
  CHECK(inv[0].centrality == 1.0);
  CHECK(std::abs(inv[0].score - 0.2) <= 1e-12);

  cfg.centrality_mode = CentralityMode::raw_distance;
  CHECK(rank_masks(std::vector<Mask>{centered}, cfg, 4, 4)[0].score == 0.0);

  // Exact corner centroid is unreachable for an in-image bbox centre on the
  // (W-1)/2 convention, so check the clamp on centrality directly.
  const Mask corner = rect_mask(101, 101, 0, 0, 0, 0);
  const auto far = rank_masks(std::vector<Mask>{corner}, SelectionConfig{}, 101, 101);
  CHECK(far[0].centrality == doctest::Approx(1.0 - (50.0 / 101.0 * std::sqrt(2.0)) / std::sqrt(0.5)));
  CHECK(far[0].centrality >= 0.0);

  CHECK_THROWS_AS(rank_masks(std::vector<Mask>{Mask::empty(4, 4)}, SelectionConfig{}, 4, 4), EmptyMask);
}

TEST_CASE("centrality clamp boundary") {
  CHECK(centrality_from_proximity(std::sqrt(0.5)) == 0.0);
  CHECK(centrality_from_proximity(1.0) == 0.0);
  CHECK(centrality_from_proximity(0.0) == 1.0);
  // Score is zero for a mask whose centrality is zero.
  CHECK(centrality_from_proximity(std::sqrt(0.5)) * 0.25 * 0.8 == 0.0);
}

TEST_CASE("more central mask never ranks lower when A and C tie") {
  const Mask central = rect_mask(21, 21, 8, 8, 12, 12, 0.7);
  const Mask offset = rect_mask(21, 21, 0, 3, 4, 7, 0.7);
  const auto r = rank_masks(std::vector<Mask>{offset, central}, SelectionConfig{}, 21, 21);
  CHECK(r[0].mask.same_support(central));
}

TEST_CASE("property: rank order invariant under uniform confidence scaling") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto masks = random_mask_set(rng, 32, 32, uniform_int(rng, 1, 10));
    const double scale = uniform_real(rng, 0.1, 1.0);
    std::vector<Mask> scaled;
    for (const Mask& m : masks) scaled.push_back(m.with_confidence(m.confidence() * scale));
    for (auto mode : {CentralityMode::inverted_distance, CentralityMode::raw_distance}) {
      SelectionConfig cfg;
      cfg.centrality_mode = mode;
      const auto a = rank_masks(masks, cfg, 32, 32);
      const auto b = rank_masks(scaled, cfg, 32, 32);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].mask.same_support(b[i].mask));
    }
  }
}

TEST_CASE("select_candidates sizes and order") {
  std::mt19937_64 rng(9);
  auto seven = rank_masks(random_mask_set(rng, 16, 16, 7), SelectionConfig{}, 16, 16);
  const CandidateSet ten = select_candidates(seven, SelectionConfig{});
  CHECK(ten.candidates.size() == 10);
  CHECK(ten.k_effective == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(ten.candidates[i].mask.same_support(seven[i].mask));
    CHECK(ten.candidates[i + 5].mask.same_support(invert(seven[i].mask)));
    CHECK(ten.candidates[i + 5].inverted);
  }

  auto three = rank_masks(random_mask_set(rng, 16, 16, 3), SelectionConfig{}, 16, 16);
  CHECK(select_candidates(three, SelectionConfig{}).candidates.size() == 6);

  SelectionConfig k1;
  k1.k = 1;
  auto one = rank_masks(std::vector<Mask>{rect_mask(8, 8, 1, 1, 3, 3)}, k1, 8, 8);
  const CandidateSet two = select_candidates(one, k1);
  REQUIRE(two.candidates.size() == 2);
  CHECK(two.candidates[1].mask.same_support(invert(two.candidates[0].mask)));

  std::vector<std::string> ids;
  for (const auto& c : ten.candidates) ids.push_back(c.id);
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("property: candidate pairs partition the image") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ranked = rank_masks(random_mask_set(rng, 20, 20, uniform_int(rng, 1, 8)),
                                   SelectionConfig{}, 20, 20);
    const CandidateSet set = select_candidates(ranked, SelectionConfig{});
    CHECK(set.candidates.size() % 2 == 0);
    const std::size_t k = set.candidates.size() / 2;
    for (std::size_t i = 0; i < k; ++i) {
      const Mask& m = set.candidates[i].mask;
      const Mask& inv = set.candidates[i + k].mask;
      CHECK(intersection_area(m, inv) == 0);
      CHECK(m.area() + inv.area() == m.pixel_count());
    }
  }
}

TEST_CASE("config validation") {
  SelectionConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.k = 1;
  cfg.iou_merge_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.iou_merge_threshold = 1.0;
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_centrality_mode("raw-distance") == CentralityMode::raw_distance);
  CHECK_THROWS_AS(parse_centrality_mode("sideways"), ConfigError);
}
