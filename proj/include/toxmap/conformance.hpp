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

#ifndef TOXMAP_CONFORMANCE_HPP
#define TOXMAP_CONFORMANCE_HPP

#include <string>
#include <vector>

#include "toxmap/protocol.hpp"

namespace toxmap {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Exercises a live segmenter/scorer pair against the wire protocol: ping,
/// well-formed and malformed requests, schema of the replies, and
/// determinism of repeated scoring. `probe` must be an image the servers
/// accept.
std::vector<ConformanceCheck> run_conformance(const Endpoint& segmenter, const Endpoint& scorer,
                                              const RgbImage& probe,
                                              const PolicyPrompt& prompt = default_policy_prompt());

}  // namespace toxmap

#endif  // TOXMAP_CONFORMANCE_HPP
