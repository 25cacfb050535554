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

#include "toxmap/fusion.hpp"

#include <cmath>
#include <string>

namespace toxmap {

std::string_view to_string(WeightMode mode) {
  return mode == WeightMode::drop ? "drop" : "occluded-tox";
}

WeightMode parse_weight_mode(std::string_view text) {
  if (text == "drop") return WeightMode::drop;
  if (text == "occluded-tox" || text == "occluded_tox") return WeightMode::occluded_tox;
  throw ConfigError("unknown weight mode '" + std::string(text) + "'");
}

RgbImage occlude(const RgbImage& image, const Mask& mask, Rgb fill) {
  if (image.width() != mask.width() || image.height() != mask.height())
    throw DimensionError("mask does not match image dimensions");
  RgbImage out = image;
  mask.for_each_interval([&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) out.set(i, fill);
  });
  return out;
}

double toxicity_from_logits(double logit_pos, double logit_neg) {
  if (!std::isfinite(logit_pos) || !std::isfinite(logit_neg))
    throw InvalidLogits("logits must be finite");
  const double top = std::max(logit_pos, logit_neg);
  const double e_pos = std::exp(logit_pos - top);
  const double e_neg = std::exp(logit_neg - top);
  return e_pos / (e_pos + e_neg);
}

double fusion_weight(double tox_image, double tox_occluded, WeightMode mode) {
  if (mode == WeightMode::occluded_tox) return tox_occluded;
  return std::max(0.0, tox_image - tox_occluded);
}

}  // namespace toxmap
