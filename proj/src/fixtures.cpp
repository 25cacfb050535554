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

#include "toxmap/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace toxmap {
namespace {

constexpr std::array<Rgb, 12> kPalette{{
    {220, 20, 60},   {34, 139, 34},  {30, 144, 255}, {255, 215, 0},
    {199, 21, 133},  {0, 206, 209},  {255, 140, 0},  {106, 90, 205},
    {128, 128, 128}, {139, 69, 19},  {255, 182, 193}, {0, 128, 128},
}};

constexpr std::array<const char*, 4> kCategories{"illegal", "porn", "violence", "extremism"};

// Portable range mapping; std distributions differ between standard libraries.
int uniform(std::mt19937_64& rng, int lo, int hi) {
  return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

bool boxes_touch(const Box& a, const Box& b, int margin) {
  return a.x_min - margin <= b.x_max && b.x_min - margin <= a.x_max &&
         a.y_min - margin <= b.y_max && b.y_min - margin <= a.y_max;
}

// Keeps the rows in [row_lo, row_hi] of a mask.
Mask keep_rows(const Mask& m, int row_lo, int row_hi) {
  return mask_intersection(m, box_mask({0, row_lo, m.width() - 1, row_hi}, m.width(), m.height()))
      .with_confidence(m.confidence());
}

Mask keep_cols(const Mask& m, int col_lo, int col_hi) {
  return mask_intersection(m, box_mask({col_lo, 0, col_hi, m.height() - 1}, m.width(), m.height()))
      .with_confidence(m.confidence());
}

void append_split(const Mask& m, SplitMode split, std::vector<Mask>& out) {
  if (split == SplitMode::none) {
    out.push_back(m);
    return;
  }
  const Box b = geometry(m).bbox;
  if (split == SplitMode::oversplit) {
    const int mid = (b.x_min + b.x_max) / 2;
    for (Mask half : {keep_cols(m, b.x_min, mid), keep_cols(m, mid + 1, b.x_max)})
      if (!half.is_empty()) out.push_back(std::move(half));
    return;
  }
  const int rows = b.y_max - b.y_min + 1;
  if (rows < 5) {
    out.push_back(m);
    return;
  }
  const int cut = std::max(1, int(std::lround(0.2 * rows)));
  out.push_back(keep_rows(m, b.y_min + cut, b.y_max));
  out.push_back(keep_rows(m, b.y_min, b.y_max - cut));
}

}  // namespace

Mask Fixture::toxic_union() const {
  if (elements.empty()) return Mask::empty(image.width(), image.height());
  std::vector<Mask> masks;
  for (const auto& e : elements) masks.push_back(e.mask);
  return mask_union(masks).with_confidence(1.0);
}

Mask shape_mask(const ShapeSpec& shape, int width, int height) {
  const Box& b = shape.bbox;
  if (shape.kind == ShapeKind::rect) return box_mask(b, width, height);
  const double rx = 0.5 * (b.x_max - b.x_min + 1);
  const double ry = 0.5 * (b.y_max - b.y_min + 1);
  const double cx = b.x_min + rx;
  const double cy = b.y_min + ry;
  std::vector<std::uint8_t> raster(std::size_t(width) * std::size_t(height), 0);
  for (int y = b.y_min; y <= b.y_max; ++y) {
    for (int x = b.x_min; x <= b.x_max; ++x) {
      const double dx = (x + 0.5 - cx) / rx;
      const double dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) raster[std::size_t(y) * std::size_t(width) + std::size_t(x)] = 1;
    }
  }
  return rle_encode(raster, width, height);
}

Fixture generate_fixture(const FixtureSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw ConfigError("fixture dimensions must be positive");
  if (spec.shapes.empty()) throw ConfigError("fixture needs at least one shape");
  if (spec.background == kBlack) throw ConfigError("background may not be pure black");

  std::vector<Mask> masks;
  for (const ShapeSpec& s : spec.shapes) {
    const Box& b = s.bbox;
    if (b.x_min < 0 || b.y_min < 0 || b.x_max >= spec.width || b.y_max >= spec.height ||
        b.x_max < b.x_min || b.y_max < b.y_min)
      throw ConfigError("shape '" + s.name + "' lies outside the image");
    if (s.color == kBlack) throw ConfigError("shape '" + s.name + "' uses the reserved black");
    if (s.color == spec.background)
      throw ConfigError("shape '" + s.name + "' has the background colour");
    masks.push_back(shape_mask(s, spec.width, spec.height));
  }
  for (std::size_t i = 0; i < masks.size(); ++i)
    for (std::size_t j = i + 1; j < masks.size(); ++j)
      if (spec.shapes[i].toxic && spec.shapes[j].toxic &&
          spec.shapes[i].color == spec.shapes[j].color &&
          intersection_area(masks[i], masks[j]) > 0)
        throw FixtureAmbiguity("toxic shapes '" + spec.shapes[i].name + "' and '" +
                               spec.shapes[j].name + "' overlap with the same colour");

  Fixture f;
  f.image = RgbImage(spec.width, spec.height, spec.background);
  f.background = spec.background;
  f.category = spec.category;
  std::vector<int> owner(std::size_t(spec.width) * std::size_t(spec.height), -1);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    masks[i].for_each_interval([&](std::int64_t b, std::int64_t e) {
      for (std::int64_t p = b; p < e; ++p) {
        f.image.set(p, spec.shapes[i].color);
        owner[std::size_t(p)] = int(i);
      }
    });
  }
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (!spec.shapes[i].toxic) continue;
    std::vector<std::uint8_t> visible(owner.size());
    for (std::size_t p = 0; p < owner.size(); ++p) visible[p] = owner[p] == int(i);
    Mask m = rle_encode(visible, spec.width, spec.height);
    if (m.is_empty())
      throw FixtureAmbiguity("toxic shape '" + spec.shapes[i].name + "' is fully hidden");
    const std::string name = spec.shapes[i].name.empty() ? "shape" + std::to_string(i)
                                                         : spec.shapes[i].name;
    f.elements.push_back({name, std::move(m)});
  }
  f.harmful = !f.elements.empty();
  return f;
}

std::vector<FixtureSpec> random_fixture_specs(const FixtureSetOptions& opts) {
  std::vector<FixtureSpec> specs;
  const int total = opts.count + opts.benign_count;
  for (int n = 0; n < total; ++n) {
    const bool benign = n >= opts.count;
    std::mt19937_64 rng(opts.seed * 0x9E3779B97F4A7C15ull + std::uint64_t(n) + 1);
    FixtureSpec spec;
    spec.width = opts.width;
    spec.height = opts.height;
    spec.seed = opts.seed;
    spec.background = opts.background;
    spec.category = benign ? "benign" : kCategories[std::size_t(uniform(rng, 0, 3))];

    std::vector<Rgb> colors;
    for (const Rgb& c : kPalette)
      if (c != opts.background) colors.push_back(c);
    const int wanted = uniform(rng, 1, 3);
    const int toxic_index = benign ? -1 : uniform(rng, 0, wanted - 1);
    const int max_side = std::max(4, std::min(opts.width, opts.height) * 3 / 8);
    const int min_side = std::max(3, max_side / 2);
    for (int s = 0; s < wanted; ++s) {
      for (int attempt = 0; attempt < 500; ++attempt) {
        const int w = uniform(rng, min_side, std::min(max_side, opts.width));
        const int h = uniform(rng, min_side, std::min(max_side, opts.height));
        const int x = uniform(rng, 0, opts.width - w);
        const int y = uniform(rng, 0, opts.height - h);
        const Box box{x, y, x + w - 1, y + h - 1};
        const bool clash = std::any_of(spec.shapes.begin(), spec.shapes.end(),
                                       [&](const ShapeSpec& o) { return boxes_touch(o.bbox, box, 1); });
        if (clash) continue;
        ShapeSpec shape;
        shape.kind = uniform(rng, 0, 1) == 0 ? ShapeKind::rect : ShapeKind::ellipse;
        const std::size_t pick = std::size_t(uniform(rng, 0, int(colors.size()) - 1));
        shape.color = colors[pick];
        colors.erase(colors.begin() + std::ptrdiff_t(pick));
        shape.bbox = box;
        shape.toxic = s == toxic_index;
        shape.name = shape.toxic ? "toxic" : "benign" + std::to_string(s);
        spec.shapes.push_back(shape);
        break;
      }
    }
    if (!benign && std::none_of(spec.shapes.begin(), spec.shapes.end(),
                                [](const ShapeSpec& s) { return s.toxic; }))
      spec.shapes.front().toxic = true;
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<Mask> OracleSegmenter::segment(const RgbImage& image) {
  const int w = image.width();
  const int h = image.height();
  const std::int64_t total = image.pixel_count();
  std::vector<std::uint8_t> seen(std::size_t(total), 0);
  std::vector<Mask> out;
  std::vector<std::int64_t> stack;
  for (std::int64_t start = 0; start < total; ++start) {
    const Rgb color = image.at(start);
    if (seen[std::size_t(start)] || color == background_ || color == kBlack) continue;
    BinaryRaster region = BinaryRaster::Zero(h, w);
    stack.assign(1, start);
    seen[std::size_t(start)] = 1;
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      region.data()[p] = true;
      const int y = int(p / w), x = int(p % w);
      auto visit = [&](std::int64_t q) {
        if (!seen[std::size_t(q)] && image.at(q) == color) {
          seen[std::size_t(q)] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    append_split(rle_encode(region), split_, out);
  }
  return out;
}

void OracleScorer::register_fixture(const RgbImage& image, const Mask& toxic_union) {
  if (toxic_union.width() != image.width() || toxic_union.height() != image.height())
    throw DimensionError("ground truth does not match the fixture image");
  entries_.push_back({image, toxic_union});
}

double OracleScorer::visible_toxic_fraction(const RgbImage& image) const {
  for (const Entry& e : entries_) {
    if (e.image.width() != image.width() || e.image.height() != image.height()) continue;
    bool match = true;
    for (std::int64_t p = 0; p < image.pixel_count() && match; ++p) {
      const Rgb q = image.at(p);
      match = q == kBlack || q == e.image.at(p);
    }
    if (!match) continue;
    if (e.toxic.is_empty()) return 0.0;
    std::int64_t visible = 0;
    e.toxic.for_each_interval([&](std::int64_t b, std::int64_t end) {
      for (std::int64_t p = b; p < end; ++p)
        if (image.at(p) != kBlack) ++visible;
    });
    return double(visible) / double(e.toxic.area());
  }
  throw OracleError("image does not match any registered fixture");
}

Logits OracleScorer::score(const RgbImage& image, const PolicyPrompt&) {
  const double v = std::clamp(visible_toxic_fraction(image), kDelta, 1.0 - kDelta);
  return {std::log(v), std::log1p(-v)};
}

}  // namespace toxmap
