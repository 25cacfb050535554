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

#ifndef TOXMAP_ERROR_HPP
#define TOXMAP_ERROR_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toxmap {

// Root of every error raised by the library. Each subclass corresponds to one
// failure kind of the public contracts, so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TOXMAP_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

TOXMAP_DEFINE_ERROR(InvalidRaster);
TOXMAP_DEFINE_ERROR(CorruptRle);
TOXMAP_DEFINE_ERROR(DimensionError);
TOXMAP_DEFINE_ERROR(EmptyMask);
TOXMAP_DEFINE_ERROR(InvalidLogits);
TOXMAP_DEFINE_ERROR(EmptyCandidates);
TOXMAP_DEFINE_ERROR(ProtocolError);
TOXMAP_DEFINE_ERROR(TimeoutError);
TOXMAP_DEFINE_ERROR(OracleError);
TOXMAP_DEFINE_ERROR(FixtureAmbiguity);
TOXMAP_DEFINE_ERROR(InvalidGroundTruth);
TOXMAP_DEFINE_ERROR(InvalidBox);
TOXMAP_DEFINE_ERROR(EmptyBenignSet);
TOXMAP_DEFINE_ERROR(ConfigError);
TOXMAP_DEFINE_ERROR(ImageError);

#undef TOXMAP_DEFINE_ERROR

// A model backend failed. `stage` names the pipeline step ("segment",
// "score", ...) and `status` carries the HTTP status when there was one.
class BackendError : public Error {
 public:
  BackendError(std::string stage, const std::string& cause,
               std::optional<int> status = std::nullopt)
      : Error(stage + ": " + cause), stage_(std::move(stage)), cause_(cause),
        status_(status) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& cause() const noexcept { return cause_; }
  std::optional<int> status() const noexcept { return status_; }

  // 5xx responses are treated as transient.
  bool is_server_error() const noexcept {
    return status_ && *status_ >= 500 && *status_ < 600;
  }

 private:
  std::string stage_;
  std::string cause_;
  std::optional<int> status_;
};

// Some manifest images have no pipeline result.
class IncompleteRun : public Error {
 public:
  explicit IncompleteRun(std::vector<std::string> missing)
      : Error("incomplete run: " + std::to_string(missing.size()) +
              " image(s) without results"),
        missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace toxmap

#endif  // TOXMAP_ERROR_HPP
