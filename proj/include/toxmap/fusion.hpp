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

#ifndef TOXMAP_FUSION_HPP
#define TOXMAP_FUSION_HPP

#include <algorithm>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "toxmap/image.hpp"
#include "toxmap/mask.hpp"

namespace toxmap {

// drop: weight = max(0, tox(I) - tox(occluded)).
// occluded_tox: weight = tox(occluded), the literal summed-toxicity map.
enum class WeightMode { drop, occluded_tox };

std::string_view to_string(WeightMode mode);
WeightMode parse_weight_mode(std::string_view text);

template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct BasicHeatmap {
  Grid<Scalar> values;  // in [0, image_tox]
  Scalar image_tox = Scalar(0);
  Scalar epsilon = Scalar(1e-8);
  WeightMode weight_mode = WeightMode::drop;

  int width() const { return int(values.cols()); }
  int height() const { return int(values.rows()); }
  bool verdict() const { return image_tox > Scalar(0.5); }

  // values / image_tox, i.e. the min-max normalised map before scaling.
  Grid<Scalar> normalized() const {
    if (!(image_tox > Scalar(0))) return Grid<Scalar>::Zero(values.rows(), values.cols());
    return values / image_tox;
  }
};

using Heatmap = BasicHeatmap<double>;

template <typename Scalar>
struct WeightedMask {
  const Mask* mask;
  Scalar weight;
};

/// Blacks out (or fills) the mask's support; all other pixels are untouched.
RgbImage occlude(const RgbImage& image, const Mask& mask, Rgb fill = kBlack);

/// exp(pos) / (exp(pos) + exp(neg)), evaluated with max subtraction.
double toxicity_from_logits(double logit_pos, double logit_neg);

double fusion_weight(double tox_image, double tox_occluded, WeightMode mode);

/// Sums weight * mask at every pixel, min-max normalises over the whole grid
/// with epsilon in the denominator, and scales by tox_image.
template <typename Scalar>
BasicHeatmap<Scalar> build_heatmap(std::span<const WeightedMask<Scalar>> candidates,
                                   Scalar tox_image, Scalar epsilon = Scalar(1e-8),
                                   WeightMode mode = WeightMode::drop) {
  if (candidates.empty()) throw EmptyCandidates("no candidates to fuse");
  const Mask& first = *candidates.front().mask;
  Grid<Scalar> acc = Grid<Scalar>::Zero(first.height(), first.width());
  Scalar* flat = acc.data();
  for (const auto& c : candidates) {
    require_same_dims(first, *c.mask);
    c.mask->for_each_interval([&](std::int64_t b, std::int64_t e) {
      Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>>(flat + b, e - b) += c.weight;
    });
  }
  const Scalar lo = acc.minCoeff();
  const Scalar hi = acc.maxCoeff();
  BasicHeatmap<Scalar> hm;
  hm.values = (acc - lo) / (hi - lo + epsilon) * tox_image;
  hm.image_tox = tox_image;
  hm.epsilon = epsilon;
  hm.weight_mode = mode;
  return hm;
}

template <typename Scalar>
BasicHeatmap<Scalar> flat_heatmap(int width, int height, Scalar tox_image,
                                  Scalar epsilon, WeightMode mode) {
  BasicHeatmap<Scalar> hm;
  hm.values = Grid<Scalar>::Zero(height, width);
  hm.image_tox = tox_image;
  hm.epsilon = epsilon;
  hm.weight_mode = mode;
  return hm;
}

/// Binarises the normalised map at >= tau and returns its 4-connected
/// components, largest first.
template <typename Scalar>
std::vector<Mask> extract_elements(const BasicHeatmap<Scalar>& hm, Scalar tau = Scalar(0.5)) {
  const BinaryRaster binary = hm.normalized() >= tau;
  std::vector<Mask> parts = connected_components(binary);
  std::stable_sort(parts.begin(), parts.end(), [](const Mask& a, const Mask& b) {
    return a.area() > b.area();
  });
  return parts;
}

}  // namespace toxmap

#endif  // TOXMAP_FUSION_HPP
