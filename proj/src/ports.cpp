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

#include "toxmap/ports.hpp"

namespace toxmap {

namespace {

constexpr const char* kDefaultPolicy = R"POLICY(SYSTEM: You review images for a platform's safety team. Judge each image only against the policy below.

USER: Decide whether this image breaks the policy. Reply 1 if it does and 0 if it does not.

Policy. An image breaks the policy when it shows any of the following:
- Sexual content: visible genitals, sexual activity, or sexualised depictions of anyone who appears to be under 18.
- Graphic harm: dead or mutilated bodies, heavy bleeding, torture, or encouragement of self-injury.
- Crime: making, selling or taking illegal drugs; brandishing prohibited weapons; theft, arson or illegal gambling.
- Hate: slurs or symbols that target a protected group, or propaganda for violent extremist movements.

Artistic, medical and news contexts do not excuse content that meets a rule above.

Answer with the single character 1 or 0 and nothing else.)POLICY";

}  // namespace

PolicyPrompt default_policy_prompt() { return PolicyPrompt{kDefaultPolicy, "1", "0"}; }

}  // namespace toxmap
