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

#include "toxmap/protocol.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <httplib.h>

namespace toxmap {
namespace wire {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw ProtocolError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  return *it;
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) throw ProtocolError(std::string("'") + key + "' must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 1 || n > (1 << 20)) throw ProtocolError(std::string("'") + key + "' out of range");
  return int(n);
}

double finite_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ProtocolError(std::string("'") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ProtocolError(std::string("'") + key + "' is not finite");
  return d;
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw ProtocolError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
}

std::vector<std::uint8_t> image_field(const json& j) {
  return base64_decode(string_field(j, "image_png_b64"));
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), int(bytes.size()));
  out.resize(std::size_t(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                int(text.size()));
  if (n < 0) throw ProtocolError("invalid base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(std::size_t(n) - pad);
  return out;
}

json mask_to_json(const Mask& mask) {
  return json{{"w", mask.width()},
              {"h", mask.height()},
              {"rle", mask.runs()},
              {"conf", mask.confidence()}};
}

Mask mask_from_json(const json& j) {
  const int w = int_field(j, "w");
  const int h = int_field(j, "h");
  const json& rle = field(j, "rle");
  if (!rle.is_array()) throw ProtocolError("'rle' must be an array");
  std::vector<std::uint32_t> runs;
  runs.reserve(rle.size());
  for (const json& r : rle) {
    if (!r.is_number_integer() || r.get<std::int64_t>() < 0 ||
        r.get<std::int64_t>() > std::int64_t(UINT32_MAX))
      throw ProtocolError("rle runs must be non-negative integers");
    runs.push_back(r.get<std::uint32_t>());
  }
  const double conf = finite_field(j, "conf");
  try {
    return Mask(w, h, std::move(runs), conf);
  } catch (const CorruptRle& e) {
    throw ProtocolError(std::string("invalid mask: ") + e.what());
  }
}

json masks_to_json(std::span<const Mask> masks) {
  json arr = json::array();
  for (const Mask& m : masks) arr.push_back(mask_to_json(m));
  return arr;
}

std::vector<Mask> masks_from_json(const json& j) {
  if (!j.is_array()) throw ProtocolError("expected an array of masks");
  std::vector<Mask> out;
  out.reserve(j.size());
  for (const json& m : j) out.push_back(mask_from_json(m));
  return out;
}

json to_json(const SegmentRequest& r) {
  return json{{"image_png_b64", base64_encode(r.image_png)}};
}

json to_json(const SegmentResponse& r) {
  return json{{"width", r.width}, {"height", r.height}, {"masks", masks_to_json(r.masks)}};
}

json to_json(const ScoreRequest& r) {
  return json{{"image_png_b64", base64_encode(r.image_png)},
              {"policy_prompt", r.prompt.text},
              {"positive_token", r.prompt.positive_token},
              {"negative_token", r.prompt.negative_token}};
}

json to_json(const ScoreResponse& r) {
  return json{{"logit_positive", r.logits.positive},
              {"logit_negative", r.logits.negative},
              {"model_id", r.model_id}};
}

SegmentRequest parse_segment_request(const std::string& body) {
  return SegmentRequest{image_field(parse_body(body))};
}

SegmentResponse parse_segment_response(const std::string& body) {
  const json j = parse_body(body);
  SegmentResponse r;
  r.width = int_field(j, "width");
  r.height = int_field(j, "height");
  r.masks = masks_from_json(field(j, "masks"));
  for (const Mask& m : r.masks)
    if (m.width() != r.width || m.height() != r.height)
      throw ProtocolError("mask dimensions differ from the response dimensions");
  return r;
}

ScoreRequest parse_score_request(const std::string& body) {
  const json j = parse_body(body);
  ScoreRequest r;
  r.image_png = image_field(j);
  r.prompt.text = string_field(j, "policy_prompt");
  r.prompt.positive_token = string_field(j, "positive_token");
  r.prompt.negative_token = string_field(j, "negative_token");
  return r;
}

ScoreResponse parse_score_response(const std::string& body) {
  const json j = parse_body(body);
  ScoreResponse r;
  r.logits.positive = finite_field(j, "logit_positive");
  r.logits.negative = finite_field(j, "logit_negative");
  r.model_id = string_field(j, "model_id");
  return r;
}

}  // namespace wire

namespace {

std::string post_json(const Endpoint& endpoint, const char* path,
                      const std::string& stage, const std::string& body) {
  httplib::Client client(endpoint.url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    const httplib::Error err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout)
      throw TimeoutError(stage + ": " + httplib::to_string(err));
    throw BackendError(stage, httplib::to_string(err));
  }
  if (res->status != 200)
    throw BackendError(stage,
                       "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                       res->status);
  return res->body;
}

}  // namespace

std::vector<Mask> http_segment(const Endpoint& endpoint, const RgbImage& image) {
  const std::string body = wire::to_json(wire::SegmentRequest{encode_png(image)}).dump();
  const wire::SegmentResponse r =
      wire::parse_segment_response(post_json(endpoint, wire::kSegmentPath, "segment", body));
  if (r.width != image.width() || r.height != image.height())
    throw ProtocolError("segment response dimensions do not match the image");
  return r.masks;
}

Logits http_score(const Endpoint& endpoint, const RgbImage& image, const PolicyPrompt& prompt) {
  const std::string body = wire::to_json(wire::ScoreRequest{encode_png(image), prompt}).dump();
  return wire::parse_score_response(post_json(endpoint, wire::kScorePath, "score", body)).logits;
}

std::vector<Mask> HttpSegmenter::segment(const RgbImage& image) {
  return retrying_call([&] { return http_segment(endpoint_, image); }, retry_);
}

Logits HttpScorer::score(const RgbImage& image, const PolicyPrompt& prompt) {
  return retrying_call([&] { return http_score(endpoint_, image, prompt); }, retry_);
}

}  // namespace toxmap
