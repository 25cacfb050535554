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

#include "toxmap/conformance.hpp"

#include <httplib.h>

namespace toxmap {
namespace {

struct RawReply {
  int status = -1;
  std::string body;
};

RawReply raw_request(const Endpoint& endpoint, const std::string& method, const char* path,
                     const std::string& body = {}) {
  httplib::Client client(endpoint.url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  client.set_connection_timeout(secs.count());
  client.set_read_timeout(secs.count());
  auto res = method == "GET" ? client.Get(path) : client.Post(path, body, "application/json");
  if (!res) return {-1, httplib::to_string(res.error())};
  return {res->status, res->body};
}

ConformanceCheck expect_status(const std::string& name, const RawReply& reply, int want) {
  ConformanceCheck c{name, reply.status == want, {}};
  c.detail = "status " + std::to_string(reply.status) + (c.passed ? "" : ", expected " + std::to_string(want));
  return c;
}

template <typename Fn>
ConformanceCheck guarded(const std::string& name, Fn fn) {
  try {
    std::string detail = fn();
    return {name, true, detail};
  } catch (const std::exception& e) {
    return {name, false, e.what()};
  }
}

}  // namespace

std::vector<ConformanceCheck> run_conformance(const Endpoint& segmenter, const Endpoint& scorer,
                                              const RgbImage& probe, const PolicyPrompt& prompt) {
  std::vector<ConformanceCheck> checks;
  const std::string png_b64 = wire::base64_encode(encode_png(probe));

  checks.push_back(expect_status("segmenter ping", raw_request(segmenter, "GET", wire::kPingPath), 200));
  checks.push_back(expect_status("scorer ping", raw_request(scorer, "GET", wire::kPingPath), 200));

  checks.push_back(guarded("segment reply schema", [&] {
    const RawReply r = raw_request(segmenter, "POST", wire::kSegmentPath,
                                   nlohmann::json{{"image_png_b64", png_b64}}.dump());
    if (r.status != 200) throw ProtocolError("status " + std::to_string(r.status));
    const wire::SegmentResponse parsed = wire::parse_segment_response(r.body);
    if (parsed.width != probe.width() || parsed.height != probe.height())
      throw ProtocolError("reply dimensions differ from the probe image");
    return std::to_string(parsed.masks.size()) + " valid mask(s)";
  }));
  checks.push_back(expect_status("segment malformed body",
                                 raw_request(segmenter, "POST", wire::kSegmentPath, "{not json"), 400));
  checks.push_back(expect_status("segment missing image",
                                 raw_request(segmenter, "POST", wire::kSegmentPath, "{}"), 400));
  checks.push_back(expect_status(
      "segment undecodable image",
      raw_request(segmenter, "POST", wire::kSegmentPath, R"({"image_png_b64":"AAAA"})"), 400));

  const std::string score_body = wire::to_json(wire::ScoreRequest{encode_png(probe), prompt}).dump();
  std::optional<wire::ScoreResponse> first;
  checks.push_back(guarded("score reply schema", [&] {
    const RawReply r = raw_request(scorer, "POST", wire::kScorePath, score_body);
    if (r.status != 200) throw ProtocolError("status " + std::to_string(r.status));
    first = wire::parse_score_response(r.body);
    return "model " + first->model_id;
  }));
  checks.push_back(guarded("score deterministic", [&] {
    if (!first) throw ProtocolError("no first reply");
    const RawReply r = raw_request(scorer, "POST", wire::kScorePath, score_body);
    const wire::ScoreResponse second = wire::parse_score_response(r.body);
    if (second.logits.positive != first->logits.positive ||
        second.logits.negative != first->logits.negative)
      throw ProtocolError("repeated request returned different logits");
    return std::string("identical logits");
  }));
  checks.push_back(expect_status("score malformed body",
                                 raw_request(scorer, "POST", wire::kScorePath, "[1,2"), 400));
  checks.push_back(expect_status(
      "score missing prompt",
      raw_request(scorer, "POST", wire::kScorePath,
                  nlohmann::json{{"image_png_b64", png_b64}}.dump()),
      400));
  return checks;
}

}  // namespace toxmap
