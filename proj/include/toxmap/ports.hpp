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

#ifndef TOXMAP_PORTS_HPP
#define TOXMAP_PORTS_HPP

#include <string>
#include <vector>

#include "toxmap/image.hpp"
#include "toxmap/mask.hpp"

namespace toxmap {

struct Logits {
  double positive = 0.0;
  double negative = 0.0;
};

struct PolicyPrompt {
  std::string text;
  std::string positive_token = "1";
  std::string negative_token = "0";
};

// Built-in moderation policy asking for a single "1"/"0" answer.
PolicyPrompt default_policy_prompt();

// Implementations must tolerate concurrent calls.
class SegmenterPort {
 public:
  virtual ~SegmenterPort() = default;
  virtual std::vector<Mask> segment(const RgbImage& image) = 0;
};

class ScorerPort {
 public:
  virtual ~ScorerPort() = default;
  virtual Logits score(const RgbImage& image, const PolicyPrompt& prompt) = 0;
};

}  // namespace toxmap

#endif  // TOXMAP_PORTS_HPP
