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

#include "toxmap/pipeline.hpp"

#include <atomic>
#include <exception>
#include <thread>

namespace toxmap {
namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void rethrow_as_backend(const std::string& stage) {
  try {
    throw;
  } catch (const BackendError& e) {
    throw BackendError(stage, e.cause(), e.status());
  } catch (const std::exception& e) {
    throw BackendError(stage, e.what());
  }
}

std::vector<Mask> checked_segment(SegmenterPort& segmenter, const RgbImage& image) {
  std::vector<Mask> masks;
  try {
    masks = segmenter.segment(image);
  } catch (...) {
    rethrow_as_backend("segment");
  }
  for (const Mask& m : masks)
    if (m.width() != image.width() || m.height() != image.height())
      throw BackendError("segment", "mask dimensions do not match the image");
  return masks;
}

double checked_score(ScorerPort& scorer, const RgbImage& image,
                     const PolicyPrompt& prompt) {
  try {
    const Logits l = scorer.score(image, prompt);
    return toxicity_from_logits(l.positive, l.negative);
  } catch (...) {
    rethrow_as_backend("score");
  }
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::min<std::size_t>(std::size_t(std::max(workers, 1)), n);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void PipelineConfig::validate() const {
  selection.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (score_workers < 1) throw ConfigError("score_workers must be >= 1");
  if (prompt.text.empty()) throw ConfigError("policy prompt is empty");
}

PipelineResult run_pipeline(const RgbImage& image, SegmenterPort& segmenter,
                            ScorerPort& scorer, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult result;
  result.config = cfg;

  auto t0 = Clock::now();
  const std::vector<Mask> raw = checked_segment(segmenter, image);
  result.raw_mask_count = int(raw.size());
  auto t1 = Clock::now();
  result.timing.segment = t1 - t0;

  std::vector<Mask> nonempty;
  for (const Mask& m : raw)
    if (!m.is_empty()) nonempty.push_back(m);
  std::vector<Mask> merged = cfg.merge ? merge_masks(nonempty, cfg.selection) : nonempty;
  result.merged_mask_count = int(merged.size());
  const CandidateSet candidates = select_candidates(
      rank_masks(merged, cfg.selection, image.width(), image.height()), cfg.selection);
  auto t2 = Clock::now();
  result.timing.select = t2 - t1;

  const double tox_image = checked_score(scorer, image, cfg.prompt);
  std::vector<double> occluded_tox(candidates.candidates.size(), 0.0);
  parallel_for(candidates.candidates.size(), cfg.score_workers, [&](std::size_t i) {
    const RgbImage hidden = occlude(image, candidates.candidates[i].mask, cfg.fill);
    occluded_tox[i] = checked_score(scorer, hidden, cfg.prompt);
  });
  result.scorer_calls = 1 + int(candidates.candidates.size());
  auto t3 = Clock::now();
  result.timing.score = t3 - t2;

  std::vector<WeightedMask<double>> weighted;
  for (std::size_t i = 0; i < candidates.candidates.size(); ++i) {
    const Candidate& c = candidates.candidates[i];
    const double w = fusion_weight(tox_image, occluded_tox[i], cfg.weight_mode);
    result.scored.push_back({c.id, c.mask, c.inverted, occluded_tox[i], w});
  }
  for (const ScoredMask& s : result.scored) weighted.push_back({&s.mask, s.weight});

  if (weighted.empty()) {
    result.heatmap = flat_heatmap(image.width(), image.height(), tox_image,
                                  cfg.epsilon, cfg.weight_mode);
  } else {
    result.heatmap = build_heatmap<double>(weighted, tox_image, cfg.epsilon, cfg.weight_mode);
    result.predicted_elements = extract_elements(result.heatmap, cfg.tau);
  }
  result.timing.fuse = Clock::now() - t3;
  return result;
}

}  // namespace toxmap
