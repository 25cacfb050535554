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

#include "toxmap/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace toxmap {
namespace {

// Accumulates alternating runs; starts in the "zeros" state.
class RunBuilder {
 public:
  void append(bool value, std::uint32_t count) {
    if (count == 0) return;
    if (value == current_) {
      runs_.back() += count;
    } else {
      runs_.push_back(count);
      current_ = value;
    }
  }
  std::vector<std::uint32_t> finish() && { return std::move(runs_); }

 private:
  std::vector<std::uint32_t> runs_{0};
  bool current_ = false;
};

class RunCursor {
 public:
  explicit RunCursor(const std::vector<std::uint32_t>& runs) : runs_(runs) {
    skip_empty();
  }
  bool value() const { return index_ % 2 == 1; }
  std::uint32_t remaining() const { return runs_[index_] - offset_; }
  void advance(std::uint32_t n) {
    offset_ += n;
    if (offset_ == runs_[index_]) {
      ++index_;
      offset_ = 0;
      skip_empty();
    }
  }

 private:
  void skip_empty() {
    while (index_ < runs_.size() && runs_[index_] == 0) ++index_;
  }
  const std::vector<std::uint32_t>& runs_;
  std::size_t index_ = 0;
  std::uint32_t offset_ = 0;
};

template <typename Op>
std::vector<std::uint32_t> combine_runs(const Mask& a, const Mask& b, Op op) {
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  RunBuilder out;
  std::int64_t pos = 0;
  const std::int64_t total = a.pixel_count();
  while (pos < total) {
    const std::uint32_t step = std::min(ca.remaining(), cb.remaining());
    out.append(op(ca.value(), cb.value()), step);
    ca.advance(step);
    cb.advance(step);
    pos += step;
  }
  return std::move(out).finish();
}

double weighted_confidence(std::span<const Mask> masks) {
  double weighted = 0.0;
  double total = 0.0;
  for (const Mask& m : masks) {
    weighted += double(m.area()) * m.confidence();
    total += double(m.area());
  }
  if (total > 0.0) return std::clamp(weighted / total, 0.0, 1.0);
  double mean = 0.0;
  for (const Mask& m : masks) mean += m.confidence();
  return masks.empty() ? 1.0 : mean / double(masks.size());
}

std::vector<std::uint32_t> runs_from_sorted_indices(
    const std::vector<std::int64_t>& idx, std::int64_t total) {
  RunBuilder out;
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i + 1;
    while (j < idx.size() && idx[j] == idx[j - 1] + 1) ++j;
    out.append(false, std::uint32_t(idx[i] - pos));
    out.append(true, std::uint32_t(j - i));
    pos = idx[i] + std::int64_t(j - i);
    i = j;
  }
  out.append(false, std::uint32_t(total - pos));
  return std::move(out).finish();
}

}  // namespace

double box_iou(const Box& a, const Box& b) {
  const int ix0 = std::max(a.x_min, b.x_min);
  const int iy0 = std::max(a.y_min, b.y_min);
  const int ix1 = std::min(a.x_max, b.x_max);
  const int iy1 = std::min(a.y_max, b.y_max);
  std::int64_t inter = 0;
  if (ix1 >= ix0 && iy1 >= iy0) inter = std::int64_t(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni > 0 ? double(inter) / double(uni) : 0.0;
}

Mask::Mask(int width, int height, std::vector<std::uint32_t> runs,
           double confidence)
    : width_(width), height_(height), runs_(std::move(runs)),
      confidence_(confidence), area_(0) {
  if (width_ < 1 || height_ < 1)
    throw CorruptRle("mask dimensions must be positive");
  if (runs_.empty()) throw CorruptRle("rle has no runs");
  if (!std::isfinite(confidence_) || confidence_ < 0.0 || confidence_ > 1.0)
    throw CorruptRle("confidence outside [0,1]");
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (i > 0 && runs_[i] == 0)
      throw CorruptRle("zero-length run at position " + std::to_string(i));
    sum += runs_[i];
    if (i % 2 == 1) area_ += runs_[i];
  }
  if (sum != pixel_count())
    throw CorruptRle("runs sum to " + std::to_string(sum) + ", expected " +
                     std::to_string(pixel_count()));
  if (runs_.size() == 1 && runs_[0] == 0) throw CorruptRle("rle is all zero");
}

Mask Mask::empty(int width, int height, double confidence) {
  return Mask(width, height,
              {std::uint32_t(std::int64_t(width) * height)}, confidence);
}

Mask Mask::full(int width, int height, double confidence) {
  return Mask(width, height,
              {0u, std::uint32_t(std::int64_t(width) * height)}, confidence);
}

Mask Mask::from_loose_runs(int width, int height,
                           const std::vector<std::uint32_t>& runs,
                           double confidence) {
  RunBuilder out;
  for (std::size_t i = 0; i < runs.size(); ++i) out.append(i % 2 == 1, runs[i]);
  return Mask(width, height, std::move(out).finish(), confidence);
}

std::int64_t Mask::first_pixel() const noexcept {
  return area_ == 0 ? pixel_count() : std::int64_t(runs_[0]);
}

bool Mask::contains(int x, int y) const {
  const std::int64_t target = std::int64_t(y) * width_ + x;
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    pos += runs_[i];
    if (target < pos) return i % 2 == 1;
  }
  return false;
}

Mask Mask::with_confidence(double confidence) const {
  return Mask(width_, height_, runs_, confidence);
}

void require_same_dims(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionError("mask dimensions differ: " + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
}

Mask rle_encode(std::span<const std::uint8_t> raster, int width, int height,
                double confidence) {
  if (width < 1 || height < 1 ||
      std::int64_t(raster.size()) != std::int64_t(width) * height)
    throw InvalidRaster("raster has " + std::to_string(raster.size()) +
                        " cells, expected " + std::to_string(width) + "x" +
                        std::to_string(height));
  RunBuilder out;
  for (std::uint8_t cell : raster) out.append(cell != 0, 1);
  return Mask(width, height, std::move(out).finish(), confidence);
}

Mask rle_encode(const BinaryRaster& raster, double confidence) {
  if (raster.rows() < 1 || raster.cols() < 1)
    throw InvalidRaster("raster must be non-empty");
  RunBuilder out;
  const bool* data = raster.data();
  for (Eigen::Index i = 0; i < raster.size(); ++i) out.append(data[i], 1);
  return Mask(int(raster.cols()), int(raster.rows()), std::move(out).finish(),
              confidence);
}

BinaryRaster rle_decode(const Mask& mask) {
  BinaryRaster out = BinaryRaster::Zero(mask.height(), mask.width());
  bool* data = out.data();
  mask.for_each_interval([&](std::int64_t b, std::int64_t e) {
    std::fill(data + b, data + e, true);
  });
  return out;
}

std::int64_t intersection_area(const Mask& a, const Mask& b) {
  require_same_dims(a, b);
  RunCursor ca(a.runs());
  RunCursor cb(b.runs());
  std::int64_t pos = 0;
  std::int64_t inter = 0;
  while (pos < a.pixel_count()) {
    const std::uint32_t step = std::min(ca.remaining(), cb.remaining());
    if (ca.value() && cb.value()) inter += step;
    ca.advance(step);
    cb.advance(step);
    pos += step;
  }
  return inter;
}

double iou(const Mask& a, const Mask& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

Mask mask_union(const Mask& a, const Mask& b) {
  require_same_dims(a, b);
  const Mask both[] = {a, b};
  return Mask(a.width(), a.height(),
              combine_runs(a, b, [](bool x, bool y) { return x || y; }),
              weighted_confidence(both));
}

Mask mask_union(std::span<const Mask> masks) {
  if (masks.empty()) throw EmptyMask("union of zero masks");
  std::vector<std::uint32_t> runs = masks.front().runs();
  for (const Mask& m : masks.subspan(1)) {
    require_same_dims(masks.front(), m);
    Mask acc(m.width(), m.height(), std::move(runs), 1.0);
    runs = combine_runs(acc, m, [](bool x, bool y) { return x || y; });
  }
  return Mask(masks.front().width(), masks.front().height(), std::move(runs),
              weighted_confidence(masks));
}

Mask mask_intersection(const Mask& a, const Mask& b) {
  require_same_dims(a, b);
  return Mask(a.width(), a.height(),
              combine_runs(a, b, [](bool x, bool y) { return x && y; }),
              std::min(a.confidence(), b.confidence()));
}

Mask invert(const Mask& m) {
  std::vector<std::uint32_t> runs;
  runs.reserve(m.runs().size() + 1);
  if (m.runs()[0] == 0) {
    runs.assign(m.runs().begin() + 1, m.runs().end());
  } else {
    runs.push_back(0);
    runs.insert(runs.end(), m.runs().begin(), m.runs().end());
  }
  return Mask(m.width(), m.height(), std::move(runs), m.confidence());
}

MaskGeometry geometry(const Mask& m) {
  if (m.is_empty()) throw EmptyMask("geometry of an empty mask");
  const int w = m.width();
  Box box{w, m.height(), -1, -1};
  m.for_each_interval([&](std::int64_t b, std::int64_t e) {
    const int r0 = int(b / w), c0 = int(b % w);
    const int r1 = int((e - 1) / w), c1 = int((e - 1) % w);
    box.y_min = std::min(box.y_min, r0);
    box.y_max = std::max(box.y_max, r1);
    if (r0 == r1) {
      box.x_min = std::min(box.x_min, c0);
      box.x_max = std::max(box.x_max, c1);
    } else {
      box.x_min = 0;
      box.x_max = w - 1;
    }
  });
  MaskGeometry g;
  g.bbox = box;
  g.centroid_x = 0.5 * (box.x_min + box.x_max);
  g.centroid_y = 0.5 * (box.y_min + box.y_max);
  g.area_px = m.area();
  g.area_ratio = double(m.area()) / double(m.pixel_count());
  return g;
}

std::vector<Mask> connected_components(const BinaryRaster& grid) {
  const int h = int(grid.rows());
  const int w = int(grid.cols());
  std::vector<Mask> out;
  if (h == 0 || w == 0) return out;
  const std::int64_t total = std::int64_t(w) * h;
  std::vector<std::uint8_t> seen(std::size_t(total), 0);
  const bool* data = grid.data();
  std::vector<std::int64_t> stack;
  for (std::int64_t start = 0; start < total; ++start) {
    if (!data[start] || seen[start]) continue;
    std::vector<std::int64_t> members;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      members.push_back(p);
      const int y = int(p / w), x = int(p % w);
      auto visit = [&](std::int64_t q) {
        if (data[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    std::sort(members.begin(), members.end());
    out.emplace_back(w, h, runs_from_sorted_indices(members, total), 1.0);
  }
  return out;
}

Mask box_mask(const Box& box, int width, int height) {
  const int x0 = std::max(box.x_min, 0), x1 = std::min(box.x_max, width - 1);
  const int y0 = std::max(box.y_min, 0), y1 = std::min(box.y_max, height - 1);
  if (x1 < x0 || y1 < y0) return Mask::empty(width, height);
  RunBuilder out;
  std::int64_t pos = 0;
  for (int y = y0; y <= y1; ++y) {
    const std::int64_t b = std::int64_t(y) * width + x0;
    out.append(false, std::uint32_t(b - pos));
    out.append(true, std::uint32_t(x1 - x0 + 1));
    pos = b + (x1 - x0 + 1);
  }
  out.append(false, std::uint32_t(std::int64_t(width) * height - pos));
  return Mask(width, height, std::move(out).finish(), 1.0);
}

}  // namespace toxmap
