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

#ifndef TOXMAP_FIXTURES_HPP
#define TOXMAP_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "toxmap/ports.hpp"

namespace toxmap {

enum class ShapeKind { rect, ellipse };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::rect;
  Rgb color;
  Box bbox;
  bool toxic = false;
  std::string name;
};

// Shapes are painted in order, later shapes on top. Pure black is reserved
// for occlusion and may not appear anywhere in a fixture.
struct FixtureSpec {
  int width = 64;
  int height = 64;
  std::vector<ShapeSpec> shapes;
  std::uint64_t seed = 0;
  Rgb background{255, 255, 255};
  std::string category = "illegal";
};

struct GroundTruthElement {
  std::string name;
  Mask mask;
};

struct Fixture {
  RgbImage image;
  bool harmful = false;
  std::string category;
  std::vector<GroundTruthElement> elements;  // visible pixels of toxic shapes
  Rgb background;

  Mask toxic_union() const;
};

/// Paints the shapes in order. Throws ConfigError on invalid input and FixtureAmbiguity
/// when toxic shapes of one colour overlap or a toxic shape ends up hidden.
Fixture generate_fixture(const FixtureSpec& spec);

Mask shape_mask(const ShapeSpec& shape, int width, int height);

struct FixtureSetOptions {
  int count = 20;
  std::uint64_t seed = 0;
  int width = 64;
  int height = 64;
  int benign_count = 0;  // appended after the harmful fixtures
  Rgb background{255, 255, 255};
};

/// Seeded random specs with 1-3 non-overlapping shapes, exactly one toxic
/// (benign fixtures have none). Deterministic per seed.
std::vector<FixtureSpec> random_fixture_specs(const FixtureSetOptions& opts);

enum class SplitMode {
  none,
  oversplit,      // left/right halves, disjoint
  overlap_split,  // two copies each missing 20% of rows at opposite ends
};

/// One mask per maximal 4-connected same-colour region that is neither
/// background nor pure black. Confidence 1.
class OracleSegmenter final : public SegmenterPort {
 public:
  explicit OracleSegmenter(Rgb background = {255, 255, 255},
                           SplitMode split = SplitMode::none)
      : background_(background), split_(split) {}
  std::vector<Mask> segment(const RgbImage& image) override;

 private:
  Rgb background_;
  SplitMode split_;
};

/// Toxicity equals the visible fraction of the registered toxic pixels,
/// clamped to [delta, 1 - delta] and returned as (ln v, ln(1 - v)).
///
/// A query matches a registered fixture when every non-black pixel agrees
/// with it. Registration must complete before concurrent scoring starts.
class OracleScorer final : public ScorerPort {
 public:
  static constexpr double kDelta = 1e-6;

  void register_fixture(const RgbImage& image, const Mask& toxic_union);
  void register_fixture(const Fixture& fixture) {
    register_fixture(fixture.image, fixture.toxic_union());
  }

  /// Throws OracleError for images matching no registered fixture.
  Logits score(const RgbImage& image, const PolicyPrompt& prompt) override;
  double visible_toxic_fraction(const RgbImage& image) const;

 private:
  struct Entry {
    RgbImage image;
    Mask toxic;
  };
  std::vector<Entry> entries_;
};

}  // namespace toxmap

#endif  // TOXMAP_FIXTURES_HPP
