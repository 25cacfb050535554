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

#ifndef TOXMAP_MOCK_SERVER_HPP
#define TOXMAP_MOCK_SERVER_HPP

#include <atomic>
#include <memory>
#include <string>

#include "toxmap/eval.hpp"
#include "toxmap/fixtures.hpp"

namespace toxmap {

/// Serves the oracle segmenter and scorer over the wire protocol.
///
///   malformed request        -> 400
///   image unknown to oracle  -> 422
class MockBackendServer {
 public:
  MockBackendServer(OracleSegmenter segmenter, OracleScorer scorer);
  ~MockBackendServer();
  MockBackendServer(const MockBackendServer&) = delete;
  MockBackendServer& operator=(const MockBackendServer&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  /// Throws BackendError when the port is unavailable.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  /// bind() + listen() on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  std::string url() const;
  long segment_calls() const { return segment_calls_.load(); }
  long score_calls() const { return score_calls_.load(); }
  void reset_counters() {
    segment_calls_ = 0;
    score_calls_ = 0;
  }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<long> segment_calls_{0};
  std::atomic<long> score_calls_{0};
};

/// Registers every manifest image (read from disk, relative paths resolved
/// against `base_dir`) with a scorer; the toxic union is built from the
/// manifest elements.
OracleScorer oracle_scorer_from_manifest(const DatasetManifest& manifest,
                                         const std::filesystem::path& base_dir);

}  // namespace toxmap

#endif  // TOXMAP_MOCK_SERVER_HPP
