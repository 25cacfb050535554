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

#include "toxmap/mock_server.hpp"

#include <httplib.h>

#include <thread>

#include "toxmap/protocol.hpp"

namespace toxmap {

struct MockBackendServer::Impl {
  OracleSegmenter segmenter;
  OracleScorer scorer;
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;
};

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
}

RgbImage decode_request_image(const std::vector<std::uint8_t>& png) {
  try {
    return decode_png(png);
  } catch (const ImageError& e) {
    throw ProtocolError(e.what());
  }
}

}  // namespace

MockBackendServer::MockBackendServer(OracleSegmenter segmenter, OracleScorer scorer)
    : impl_(std::make_unique<Impl>()) {
  impl_->segmenter = std::move(segmenter);
  impl_->scorer = std::move(scorer);
  auto& server = impl_->server;
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server.Get(wire::kPingPath, [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  server.Post(wire::kSegmentPath, [this](const httplib::Request& req, httplib::Response& res) {
    ++segment_calls_;
    try {
      const RgbImage image = decode_request_image(wire::parse_segment_request(req.body).image_png);
      const wire::SegmentResponse out{image.width(), image.height(),
                                      impl_->segmenter.segment(image)};
      res.set_content(wire::to_json(out).dump(), "application/json");
    } catch (const ProtocolError& e) {
      reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  });

  server.Post(wire::kScorePath, [this](const httplib::Request& req, httplib::Response& res) {
    ++score_calls_;
    try {
      const wire::ScoreRequest in = wire::parse_score_request(req.body);
      const RgbImage image = decode_request_image(in.image_png);
      const wire::ScoreResponse out{impl_->scorer.score(image, in.prompt), "oracle-visible-fraction"};
      res.set_content(wire::to_json(out).dump(), "application/json");
    } catch (const ProtocolError& e) {
      reply_error(res, 400, e.what());
    } catch (const OracleError& e) {
      reply_error(res, 422, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  });
}

MockBackendServer::~MockBackendServer() { stop(); }

int MockBackendServer::bind(const std::string& host, int port) {
  impl_->host = host;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port < 0)
    throw BackendError("mock-serve", "cannot bind " + host + ":" + std::to_string(port));
  return impl_->port;
}

void MockBackendServer::listen() { impl_->server.listen_after_bind(); }

int MockBackendServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockBackendServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockBackendServer::url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

OracleScorer oracle_scorer_from_manifest(const DatasetManifest& manifest,
                                         const std::filesystem::path& base_dir) {
  OracleScorer scorer;
  for (const ManifestImage& img : manifest.images) {
    std::filesystem::path p = img.path;
    if (p.is_relative()) p = base_dir / p;
    const RgbImage image = read_png(p);
    Mask toxic = Mask::empty(image.width(), image.height());
    if (!img.elements.empty()) {
      std::vector<Mask> masks;
      for (const ManifestElement& e : img.elements) masks.push_back(e.mask);
      toxic = mask_union(masks).with_confidence(1.0);
    }
    scorer.register_fixture(image, toxic);
  }
  return scorer;
}

}  // namespace toxmap
