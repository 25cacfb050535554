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

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "support.hpp"
#include "toxmap/fixtures.hpp"
#include "toxmap/pipeline.hpp"

using namespace toxmap;
using namespace toxmap::testing;

namespace {

constexpr Rgb kRed{220, 20, 60};
constexpr Rgb kGreen{34, 139, 34};
constexpr Rgb kBlue{30, 144, 255};

class CountingScorer final : public ScorerPort {
 public:
  explicit CountingScorer(ScorerPort& inner) : inner_(inner) {}
  Logits score(const RgbImage& image, const PolicyPrompt& prompt) override {
    ++calls;
    return inner_.score(image, prompt);
  }
  std::atomic<int> calls{0};

 private:
  ScorerPort& inner_;
};

class ConstantScorer final : public ScorerPort {
 public:
  Logits score(const RgbImage&, const PolicyPrompt&) override { return {1.5, -0.25}; }
};

class FixedSegmenter final : public SegmenterPort {
 public:
  explicit FixedSegmenter(std::vector<Mask> masks) : masks_(std::move(masks)) {}
  std::vector<Mask> segment(const RgbImage&) override { return masks_; }

 private:
  std::vector<Mask> masks_;
};

class FailingSegmenter final : public SegmenterPort {
 public:
  std::vector<Mask> segment(const RgbImage&) override { throw TimeoutError("segmenter timed out"); }
};

class FailingScorer final : public ScorerPort {
 public:
  Logits score(const RgbImage&, const PolicyPrompt&) override {
    throw BackendError("http", "HTTP 500: boom", 500);
  }
};

Fixture two_shape_fixture() {
  FixtureSpec spec;
  spec.shapes = {{ShapeKind::rect, kRed, {8, 8, 23, 23}, true, "toxic"},
                 {ShapeKind::ellipse, kGreen, {36, 30, 58, 54}, false, "benign"}};
  return generate_fixture(spec);
}

struct Oracles {
  OracleSegmenter segmenter;
  OracleScorer scorer;
};

Oracles oracles_for(const Fixture& f, SplitMode split = SplitMode::none) {
  Oracles o{OracleSegmenter({255, 255, 255}, split), {}};
  o.scorer.register_fixture(f);
  return o;
}

}  // namespace

TEST_CASE("one toxic shape is localised in drop mode") {
  FixtureSpec spec;
  spec.shapes = {{ShapeKind::ellipse, kRed, {20, 18, 41, 37}, true, "toxic"},
                 {ShapeKind::rect, kBlue, {2, 50, 20, 60}, false, "b1"},
                 {ShapeKind::rect, kGreen, {45, 2, 60, 15}, false, "b2"}};
  const Fixture f = generate_fixture(spec);
  Oracles o = oracles_for(f);
  const PipelineResult r = run_pipeline(f.image, o.segmenter, o.scorer, PipelineConfig{});
  const Mask& toxic = f.elements[0].mask;
  bool covered = false;
  for (const Mask& e : r.predicted_elements)
    covered = covered || intersection_area(e, toxic) >= 0.99 * double(toxic.area());
  CHECK(covered);
  REQUIRE(r.predicted_elements.size() == 1);
  CHECK(r.predicted_elements[0].same_support(toxic));
  CHECK(r.heatmap.verdict());
  CHECK(r.scorer_calls == 7);
}

TEST_CASE("benign fixture is not flagged") {
  FixtureSpec spec;
  spec.shapes = {{ShapeKind::rect, kGreen, {10, 10, 30, 30}, false, "b"}};
  const Fixture f = generate_fixture(spec);
  Oracles o = oracles_for(f);
  const PipelineResult r = run_pipeline(f.image, o.segmenter, o.scorer, PipelineConfig{});
  CHECK_FALSE(r.heatmap.verdict());
  CHECK(r.heatmap.image_tox <= 0.5);
}

TEST_CASE("k = 1 issues exactly three scorer calls") {
  FixtureSpec spec;
  spec.shapes = {{ShapeKind::rect, kRed, {10, 10, 30, 30}, true, "t"}};
  const Fixture f = generate_fixture(spec);
  Oracles o = oracles_for(f);
  CountingScorer counting(o.scorer);
  PipelineConfig cfg;
  cfg.selection.k = 1;
  const PipelineResult r = run_pipeline(f.image, o.segmenter, counting, cfg);
  CHECK(counting.calls == 3);
  CHECK(r.scorer_calls == 3);
  CHECK(r.scored.size() == 2);
}

TEST_CASE("drop weights single out the toxic candidate") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  const PipelineResult r = run_pipeline(f.image, o.segmenter, o.scorer, PipelineConfig{});
  const Mask& toxic = f.elements[0].mask;
  const double expected = (1.0 - OracleScorer::kDelta) - OracleScorer::kDelta;
  const ScoredMask* toxic_candidate = nullptr;
  for (const ScoredMask& s : r.scored)
    if (s.mask.same_support(toxic)) toxic_candidate = &s;
  REQUIRE(toxic_candidate != nullptr);
  CHECK(std::abs(toxic_candidate->weight - expected) <= 1e-12);
  for (const ScoredMask& s : r.scored) {
    // Candidates that leave the toxic shape visible carry no weight.
    if (intersection_area(s.mask, toxic) == 0) CHECK(s.weight < toxic_candidate->weight);
  }
}

TEST_CASE("weight modes disagree on where the heat goes") {
  const Fixture f = two_shape_fixture();
  const Mask& toxic = f.elements[0].mask;
  for (WeightMode mode : {WeightMode::drop, WeightMode::occluded_tox}) {
    Oracles o = oracles_for(f);
    PipelineConfig cfg;
    cfg.weight_mode = mode;
    const PipelineResult r = run_pipeline(f.image, o.segmenter, o.scorer, cfg);
    Eigen::Index row = 0, col = 0;
    r.heatmap.values.maxCoeff(&row, &col);
    CAPTURE(to_string(mode));
    CHECK(toxic.contains(int(col), int(row)) == (mode == WeightMode::drop));
    CHECK(r.heatmap.weight_mode == mode);
  }
}

TEST_CASE("uninformative scorer yields an empty heatmap") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  ConstantScorer constant;
  const PipelineResult r = run_pipeline(f.image, o.segmenter, constant, PipelineConfig{});
  CHECK(r.heatmap.values.maxCoeff() < 1e-6);
  CHECK(r.predicted_elements.empty());
}

TEST_CASE("zero masks fall back to a flat heatmap") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  FixedSegmenter nothing({});
  CountingScorer counting(o.scorer);
  const PipelineResult r = run_pipeline(f.image, nothing, counting, PipelineConfig{});
  CHECK(counting.calls == 1);
  CHECK(r.heatmap.values.maxCoeff() == 0.0);
  CHECK(r.heatmap.verdict());
  CHECK(r.scored.empty());
  CHECK(r.predicted_elements.empty());
}

TEST_CASE("backend failures are tagged with the stage") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  FailingSegmenter bad_segmenter;
  try {
    run_pipeline(f.image, bad_segmenter, o.scorer, PipelineConfig{});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.stage() == "segment");
  }
  FailingScorer bad_scorer;
  try {
    run_pipeline(f.image, o.segmenter, bad_scorer, PipelineConfig{});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.stage() == "score");
    CHECK(e.status() == 500);
  }
  FixedSegmenter wrong_dims({Mask::full(3, 3)});
  CHECK_THROWS_AS(run_pipeline(f.image, wrong_dims, o.scorer, PipelineConfig{}), BackendError);
}

TEST_CASE("parallel scoring matches sequential scoring") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  PipelineConfig serial;
  serial.score_workers = 1;
  PipelineConfig parallel;
  parallel.score_workers = 8;
  const PipelineResult a = run_pipeline(f.image, o.segmenter, o.scorer, serial);
  const PipelineResult b = run_pipeline(f.image, o.segmenter, o.scorer, parallel);
  CHECK((a.heatmap.values == b.heatmap.values).all());
  REQUIRE(a.scored.size() == b.scored.size());
  for (std::size_t i = 0; i < a.scored.size(); ++i) {
    CHECK(a.scored[i].id == b.scored[i].id);
    CHECK(a.scored[i].weight == b.scored[i].weight);
  }
}

TEST_CASE("merge ablation keeps duplicate masks") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f, SplitMode::overlap_split);
  PipelineConfig merged;
  const PipelineResult with_merge = run_pipeline(f.image, o.segmenter, o.scorer, merged);
  CHECK(with_merge.raw_mask_count == 4);
  CHECK(with_merge.merged_mask_count == 2);
  CHECK(with_merge.scorer_calls == 5);
  PipelineConfig unmerged;
  unmerged.merge = false;
  const PipelineResult without = run_pipeline(f.image, o.segmenter, o.scorer, unmerged);
  CHECK(without.merged_mask_count == 4);
  CHECK(without.scorer_calls == 9);
}

TEST_CASE("invalid pipeline config is rejected") {
  const Fixture f = two_shape_fixture();
  Oracles o = oracles_for(f);
  PipelineConfig cfg;
  cfg.tau = 1.0;
  CHECK_THROWS_AS(run_pipeline(f.image, o.segmenter, o.scorer, cfg), ConfigError);
  cfg = PipelineConfig{};
  cfg.selection.k = 0;
  CHECK_THROWS_AS(run_pipeline(f.image, o.segmenter, o.scorer, cfg), ConfigError);
}
