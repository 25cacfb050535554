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

#ifndef TOXMAP_MASK_HPP
#define TOXMAP_MASK_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "toxmap/error.hpp"

namespace toxmap {

// Row-major boolean raster indexed (row, col) == (y, x).
using BinaryRaster =
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Inclusive pixel box.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  std::int64_t area() const {
    return std::int64_t(x_max - x_min + 1) * (y_max - y_min + 1);
  }
  bool operator==(const Box&) const = default;
};

double box_iou(const Box& a, const Box& b);

struct MaskGeometry {
  Box bbox;
  double centroid_x = 0.0;  // bbox center
  double centroid_y = 0.0;
  std::int64_t area_px = 0;
  double area_ratio = 0.0;
};

/// Binary region over a width x height image stored as canonical run-length
/// encoding: row-major, alternating runs, the first run counting zeros. Only
/// the first run may be zero, and only when the first pixel is set.
///
/// Instances are immutable once constructed.
class Mask {
 public:
  /// Validates the runs; throws CorruptRle when they do not sum to
  /// width * height or are not canonical.
  Mask(int width, int height, std::vector<std::uint32_t> runs,
       double confidence = 1.0);

  static Mask empty(int width, int height, double confidence = 1.0);
  static Mask full(int width, int height, double confidence = 1.0);

  // Builds a mask from arbitrary (possibly non-canonical) runs.
  static Mask from_loose_runs(int width, int height,
                              const std::vector<std::uint32_t>& runs,
                              double confidence);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::int64_t pixel_count() const noexcept {
    return std::int64_t(width_) * height_;
  }
  const std::vector<std::uint32_t>& runs() const noexcept { return runs_; }
  double confidence() const noexcept { return confidence_; }
  std::int64_t area() const noexcept { return area_; }
  bool is_empty() const noexcept { return area_ == 0; }

  /// Row-major index of the first set pixel, or pixel_count() when empty.
  std::int64_t first_pixel() const noexcept;

  bool contains(int x, int y) const;

  Mask with_confidence(double confidence) const;

  bool same_support(const Mask& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           runs_ == other.runs_;
  }
  bool operator==(const Mask&) const = default;

  /// Calls fn(begin, end) for every maximal half-open interval of set pixels
  /// in row-major index space.
  template <typename Fn>
  void for_each_interval(Fn&& fn) const {
    std::int64_t pos = 0;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
      const std::int64_t next = pos + runs_[i];
      if (i % 2 == 1) fn(pos, next);
      pos = next;
    }
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint32_t> runs_;
  double confidence_;
  std::int64_t area_;
};

void require_same_dims(const Mask& a, const Mask& b);

Mask rle_encode(std::span<const std::uint8_t> raster, int width, int height,
                double confidence = 1.0);
Mask rle_encode(const BinaryRaster& raster, double confidence = 1.0);
BinaryRaster rle_decode(const Mask& mask);

std::int64_t intersection_area(const Mask& a, const Mask& b);

/// |a n b| / |a u b|, 0 when both are empty.
double iou(const Mask& a, const Mask& b);

/// Pixel union. The confidence is the area-weighted mean of the inputs.
Mask mask_union(const Mask& a, const Mask& b);
Mask mask_union(std::span<const Mask> masks);

Mask mask_intersection(const Mask& a, const Mask& b);

/// Complement; carries the confidence over.
Mask invert(const Mask& m);

/// Throws EmptyMask for an empty mask.
MaskGeometry geometry(const Mask& m);

/// 4-connected components ordered by their first row-major pixel.
std::vector<Mask> connected_components(const BinaryRaster& grid);

/// Mask covering an inclusive box clipped to the image.
Mask box_mask(const Box& box, int width, int height);

}  // namespace toxmap

#endif  // TOXMAP_MASK_HPP
