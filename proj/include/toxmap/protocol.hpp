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

#ifndef TOXMAP_PROTOCOL_HPP
#define TOXMAP_PROTOCOL_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "toxmap/ports.hpp"

namespace toxmap {

// JSON-over-HTTP wire protocol shared with model servers.
//
//   POST /v1/segment  {"image_png_b64"} -> {"width","height","masks":[rle...]}
//   POST /v1/score    {"image_png_b64","policy_prompt","positive_token",
//                      "negative_token"} -> {"logit_positive","logit_negative",
//                      "model_id"}
//   GET  /v1/ping
//
// An rle object is {"w","h","rle","conf"}.
namespace wire {

inline constexpr const char* kSegmentPath = "/v1/segment";
inline constexpr const char* kScorePath = "/v1/score";
inline constexpr const char* kPingPath = "/v1/ping";

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

nlohmann::json mask_to_json(const Mask& mask);
// Throws ProtocolError on any schema or mask-invariant violation.
Mask mask_from_json(const nlohmann::json& j);

nlohmann::json masks_to_json(std::span<const Mask> masks);
std::vector<Mask> masks_from_json(const nlohmann::json& j);

struct SegmentRequest {
  std::vector<std::uint8_t> image_png;
};
struct SegmentResponse {
  int width = 0;
  int height = 0;
  std::vector<Mask> masks;
};
struct ScoreRequest {
  std::vector<std::uint8_t> image_png;
  PolicyPrompt prompt;
};
struct ScoreResponse {
  Logits logits;
  std::string model_id;
};

nlohmann::json to_json(const SegmentRequest& r);
nlohmann::json to_json(const SegmentResponse& r);
nlohmann::json to_json(const ScoreRequest& r);
nlohmann::json to_json(const ScoreResponse& r);

SegmentRequest parse_segment_request(const std::string& body);
SegmentResponse parse_segment_response(const std::string& body);
ScoreRequest parse_score_request(const std::string& body);
ScoreResponse parse_score_response(const std::string& body);

}  // namespace wire

struct Endpoint {
  std::string url;  // scheme://host:port
  std::chrono::milliseconds timeout{60'000};
};

inline constexpr const char* kSegmenterUrlEnv = "TOXMAP_SEGMENTER_URL";
inline constexpr const char* kScorerUrlEnv = "TOXMAP_SCORER_URL";
inline constexpr const char* kTimeoutEnv = "TOXMAP_BACKEND_TIMEOUT_SECS";

// Errors: BackendError for non-200 (status attached) or connection failure,
// ProtocolError for schema violations, TimeoutError when the timeout lapses.
std::vector<Mask> http_segment(const Endpoint& endpoint, const RgbImage& image);
Logits http_score(const Endpoint& endpoint, const RgbImage& image,
                  const PolicyPrompt& prompt);

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds base_backoff{250};
  // Injectable for tests.
  std::function<void(std::chrono::milliseconds)> sleep =
      [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
};

struct RetryStats {
  int retries = 0;
};

/// Retries `op` on TimeoutError and 5xx BackendError with exponential backoff
/// (base, 2*base, ...). Anything else propagates immediately. Exhaustion
/// raises BackendError carrying the last cause.
template <typename Op>
auto retrying_call(Op&& op, const RetryPolicy& policy = {}, RetryStats* stats = nullptr)
    -> decltype(op()) {
  std::chrono::milliseconds delay = policy.base_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return op();
    } catch (const TimeoutError& e) {
      if (attempt >= policy.retries)
        throw BackendError("retry", std::string("retries exhausted: ") + e.what());
    } catch (const BackendError& e) {
      if (!e.is_server_error()) throw;
      if (attempt >= policy.retries)
        throw BackendError(e.stage(), "retries exhausted: " + e.cause(), e.status());
    }
    if (stats) ++stats->retries;
    policy.sleep(delay);
    delay *= 2;
  }
}

class HttpSegmenter final : public SegmenterPort {
 public:
  explicit HttpSegmenter(Endpoint endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(std::move(retry)) {}
  std::vector<Mask> segment(const RgbImage& image) override;

 private:
  Endpoint endpoint_;
  RetryPolicy retry_;
};

class HttpScorer final : public ScorerPort {
 public:
  explicit HttpScorer(Endpoint endpoint, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), retry_(std::move(retry)) {}
  Logits score(const RgbImage& image, const PolicyPrompt& prompt) override;

 private:
  Endpoint endpoint_;
  RetryPolicy retry_;
};

}  // namespace toxmap

#endif  // TOXMAP_PROTOCOL_HPP
