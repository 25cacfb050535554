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

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "support.hpp"
#include "toxmap/conformance.hpp"
#include "toxmap/fixtures.hpp"
#include "toxmap/fusion.hpp"
#include "toxmap/mock_server.hpp"
#include "toxmap/protocol.hpp"

#include "scripted_server.hpp"

// After Eigen: resolv.h defines a _res macro that collides with Eigen internals.
#include <httplib.h>

using namespace toxmap;
using namespace toxmap::testing;
using nlohmann::json;

namespace {

std::string logits_body(double pos, double neg) {
  return json{{"logit_positive", pos}, {"logit_negative", neg}, {"model_id", "scripted"}}.dump();
}

RetryPolicy recording_policy(std::vector<std::chrono::milliseconds>& sleeps, int retries = 2) {
  RetryPolicy p;
  p.retries = retries;
  p.sleep = [&sleeps](std::chrono::milliseconds d) { sleeps.push_back(d); };
  return p;
}

std::vector<Mask> random_mask_list(std::mt19937_64& rng) {
  const int w = uniform_int(rng, 1, 24), h = uniform_int(rng, 1, 24);
  std::vector<Mask> masks;
  const int n = uniform_int(rng, 0, 5);
  for (int i = 0; i < n; ++i) {
    const Raster r = random_raster(rng, w, h);
    masks.push_back(rle_encode(r.cells, w, h, uniform_real(rng, 0.0, 1.0)));
  }
  return masks;
}

Fixture probe_fixture() {
  FixtureSpec spec;
  spec.shapes = {{ShapeKind::rect, {220, 20, 60}, {8, 8, 23, 23}, true, "t"},
                 {ShapeKind::ellipse, {34, 139, 34}, {36, 30, 58, 54}, false, "b"}};
  return generate_fixture(spec);
}

}  // namespace

TEST_CASE("base64") {
  const std::string text = "foobar";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  CHECK(wire::base64_encode(bytes) == "Zm9vYmFy");
  CHECK(wire::base64_encode(std::span(bytes).first(4)) == "Zm9vYg==");
  CHECK(wire::base64_decode("Zm9vYg==") == std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4));
  CHECK(wire::base64_decode("").empty());
  CHECK_THROWS_AS(wire::base64_decode("Zm9v!g=="), ProtocolError);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> data(std::size_t(uniform_int(rng, 0, 300)));
    for (auto& b : data) b = std::uint8_t(rng());
    CHECK(wire::base64_decode(wire::base64_encode(data)) == data);
  }
}

TEST_CASE("mask lists survive serialize and parse") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<Mask> masks = random_mask_list(rng);
    const int w = masks.empty() ? 4 : masks[0].width(), h = masks.empty() ? 4 : masks[0].height();
    const wire::SegmentResponse out{w, h, masks};
    const wire::SegmentResponse back = wire::parse_segment_response(wire::to_json(out).dump());
    CHECK(back.width == w);
    CHECK(back.height == h);
    CHECK(back.masks == masks);
  }
}

TEST_CASE("wire field names") {
  const wire::SegmentRequest seg{{1, 2, 3}};
  CHECK(wire::to_json(seg) == json{{"image_png_b64", "AQID"}});
  const wire::ScoreRequest score{{1, 2, 3}, {"policy", "yes", "no"}};
  CHECK(wire::to_json(score) == json{{"image_png_b64", "AQID"},
                                     {"policy_prompt", "policy"},
                                     {"positive_token", "yes"},
                                     {"negative_token", "no"}});
  const wire::ScoreRequest parsed = wire::parse_score_request(wire::to_json(score).dump());
  CHECK(parsed.prompt.text == "policy");
  CHECK(parsed.prompt.positive_token == "yes");
  CHECK(wire::mask_to_json(Mask(2, 2, {1, 3}, 0.5)) ==
        json{{"w", 2}, {"h", 2}, {"rle", {1, 3}}, {"conf", 0.5}});
}

TEST_CASE("schema violations are protocol errors") {
  // Runs sum to 5 on a 2x2 mask.
  CHECK_THROWS_AS(wire::parse_segment_response(
                      R"({"width":2,"height":2,"masks":[{"w":2,"h":2,"rle":[1,4],"conf":1}]})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_segment_response(
                      R"({"width":3,"height":2,"masks":[{"w":2,"h":2,"rle":[4],"conf":1}]})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_segment_response(R"({"width":2,"height":2})"), ProtocolError);
  CHECK_THROWS_AS(wire::parse_segment_response("not json"), ProtocolError);
  CHECK_THROWS_AS(wire::parse_segment_response(
                      R"({"width":2,"height":2,"masks":[{"w":2,"h":2,"rle":[4],"conf":1.5}]})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_score_response(R"({"logit_positive":null,"logit_negative":0,"model_id":"m"})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_score_response(R"({"logit_positive":"1","logit_negative":0,"model_id":"m"})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_score_response(R"({"logit_negative":0,"model_id":"m"})"), ProtocolError);
  CHECK_THROWS_AS(wire::parse_score_response(R"({"logit_positive":1e400,"logit_negative":0,"model_id":"m"})"),
                  ProtocolError);
  CHECK_THROWS_AS(wire::parse_score_request(R"({"image_png_b64":"AQID"})"), ProtocolError);
  const auto ok = wire::parse_segment_response(R"({"width":2,"height":2,"masks":[]})");
  CHECK(ok.masks.empty());
}

TEST_CASE("http_score against scripted replies") {
  const RgbImage image(4, 3, Rgb{10, 20, 30});
  SUBCASE("logits and request bytes") {
    ScriptedServer server({{200, logits_body(2.0, 0.0)}});
    const Logits l = http_score(server.endpoint(), image, default_policy_prompt());
    CHECK(std::abs(toxicity_from_logits(l.positive, l.negative) - 0.8807970779778823) <= 1e-12);
    const json sent = json::parse(server.last_body());
    CHECK(wire::base64_decode(sent["image_png_b64"].get<std::string>()) == encode_png(image));
    CHECK(sent["policy_prompt"] == default_policy_prompt().text);
    CHECK(sent["positive_token"] == "1");
    CHECK(sent["negative_token"] == "0");
  }
  SUBCASE("equal logits") {
    ScriptedServer server({{200, logits_body(0.0, 0.0)}});
    const Logits l = http_score(server.endpoint(), image, default_policy_prompt());
    CHECK(toxicity_from_logits(l.positive, l.negative) == 0.5);
  }
  SUBCASE("500 carries status and body") {
    ScriptedServer server({{500, "model exploded"}});
    try {
      http_score(server.endpoint(), image, default_policy_prompt());
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.status() == 500);
      CHECK(e.stage() == "score");
      CHECK(std::string(e.what()).find("model exploded") != std::string::npos);
    }
  }
  SUBCASE("503 then 200 retries once") {
    ScriptedServer server({{503, "busy"}, {200, logits_body(1.0, 0.0)}});
    std::vector<std::chrono::milliseconds> sleeps;
    RetryStats stats;
    const Endpoint ep = server.endpoint();
    const Logits l = retrying_call([&] { return http_score(ep, image, default_policy_prompt()); },
                                   recording_policy(sleeps), &stats);
    CHECK(l.positive == 1.0);
    CHECK(stats.retries == 1);
    CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(250)});
    CHECK(server.calls() == 2);
  }
  SUBCASE("malformed reply is not retried") {
    ScriptedServer server({{200, "{\"logit_positive\": 1}"}});
    std::vector<std::chrono::milliseconds> sleeps;
    RetryStats stats;
    const Endpoint ep = server.endpoint();
    CHECK_THROWS_AS(retrying_call([&] { return http_score(ep, image, default_policy_prompt()); },
                                  recording_policy(sleeps), &stats),
                    ProtocolError);
    CHECK(stats.retries == 0);
    CHECK(server.calls() == 1);
  }
  SUBCASE("client errors are not retried") {
    ScriptedServer server({{404, "no"}});
    std::vector<std::chrono::milliseconds> sleeps;
    RetryStats stats;
    const Endpoint ep = server.endpoint();
    CHECK_THROWS_AS(retrying_call([&] { return http_score(ep, image, default_policy_prompt()); },
                                  recording_policy(sleeps), &stats),
                    BackendError);
    CHECK(stats.retries == 0);
  }
  SUBCASE("timeouts exhaust the retries") {
    ScriptedServer server({{200, logits_body(1.0, 0.0), std::chrono::milliseconds(400)}});
    const Endpoint ep = server.endpoint(std::chrono::milliseconds(100));
    CHECK_THROWS_AS(http_score(ep, image, default_policy_prompt()), TimeoutError);
    std::vector<std::chrono::milliseconds> sleeps;
    RetryStats stats;
    CHECK_THROWS_AS(retrying_call([&] { return http_score(ep, image, default_policy_prompt()); },
                                  recording_policy(sleeps), &stats),
                    BackendError);
    CHECK(stats.retries == 2);
    CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(250),
                                                           std::chrono::milliseconds(500)});
  }
}

TEST_CASE("http_segment against scripted replies") {
  const RgbImage image(2, 2, Rgb{1, 1, 1});
  ScriptedServer bad({{200, R"({"width":2,"height":2,"masks":[{"w":2,"h":2,"rle":[1,4],"conf":1}]})"}});
  CHECK_THROWS_AS(http_segment(bad.endpoint(), image), ProtocolError);
  ScriptedServer wrong({{200, R"({"width":3,"height":2,"masks":[]})"}});
  CHECK_THROWS_AS(http_segment(wrong.endpoint(), image), ProtocolError);
  ScriptedServer empty({{200, R"({"width":2,"height":2,"masks":[]})"}});
  CHECK(http_segment(empty.endpoint(), image).empty());
  CHECK_THROWS_AS(http_segment({"http://127.0.0.1:1", std::chrono::seconds(1)}, image), BackendError);
}

TEST_CASE("mock backend server") {
  const Fixture f = probe_fixture();
  OracleScorer scorer;
  scorer.register_fixture(f);
  MockBackendServer server(OracleSegmenter{}, scorer);
  server.start();
  const Endpoint ep{server.url(), std::chrono::seconds(5)};

  HttpSegmenter segmenter(ep);
  const std::vector<Mask> masks = segmenter.segment(f.image);
  CHECK(masks == OracleSegmenter{}.segment(f.image));
  CHECK(masks.size() == 2);
  CHECK(segmenter.segment(RgbImage(8, 8, Rgb{255, 255, 255})).empty());

  HttpScorer http_scorer(ep);
  const Logits remote = http_scorer.score(f.image, default_policy_prompt());
  const Logits local = scorer.score(f.image, default_policy_prompt());
  CHECK(remote.positive == local.positive);
  CHECK(remote.negative == local.negative);

  try {
    http_score(ep, RgbImage(64, 64, Rgb{0, 0, 255}), default_policy_prompt());
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.status() == 422);
  }

  httplib::Client raw(server.url());
  auto res = raw.Post(wire::kScorePath, "{\"image_png_b64\": 3}", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = raw.Post(wire::kSegmentPath, "[]", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = raw.Get(wire::kPingPath);
  REQUIRE(res);
  CHECK(res->status == 200);

  // Concurrent scoring is safe and deterministic.
  std::vector<std::jthread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 6; ++t)
    threads.emplace_back([&] {
      const Logits l = http_scorer.score(f.image, default_policy_prompt());
      if (l.positive != local.positive || l.negative != local.negative) ++mismatches;
    });
  threads.clear();
  CHECK(mismatches == 0);
  CHECK(server.score_calls() >= 8);
  server.stop();
}

TEST_CASE("conformance suite passes against the mock") {
  const Fixture f = probe_fixture();
  OracleScorer scorer;
  scorer.register_fixture(f);
  MockBackendServer server(OracleSegmenter{}, scorer);
  server.start();
  const Endpoint ep{server.url(), std::chrono::seconds(5)};
  const auto checks = run_conformance(ep, ep, f.image);
  CHECK(checks.size() >= 8);
  for (const ConformanceCheck& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
  server.stop();

  ScriptedServer broken({{500, "down"}});
  const auto failing = run_conformance(broken.endpoint(), broken.endpoint(), f.image);
  CHECK(std::any_of(failing.begin(), failing.end(), [](const auto& c) { return !c.passed; }));
}
