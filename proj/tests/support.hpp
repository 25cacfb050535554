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

// Test-only generators and brute-force oracles. Nothing here calls into the
// run-length code paths it is used to check.

#ifndef TOXMAP_TESTS_SUPPORT_HPP
#define TOXMAP_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "toxmap/mask.hpp"

namespace toxmap::testing {

struct Raster {
  int width = 1;
  int height = 1;
  std::vector<std::uint8_t> cells;

  bool at(int x, int y) const { return cells[std::size_t(y) * width + x] != 0; }
  std::int64_t count() const {
    std::int64_t n = 0;
    for (auto c : cells) n += c != 0;
    return n;
  }
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
}

// Mixture of densities and blob structure so that long and short runs occur.
inline Raster random_raster(std::mt19937_64& rng, int width, int height) {
  Raster r{width, height, std::vector<std::uint8_t>(std::size_t(width) * height, 0)};
  const int style = uniform_int(rng, 0, 3);
  if (style == 0) {
    const double p = uniform_real(rng, 0.0, 1.0);
    for (auto& c : r.cells) c = uniform_real(rng, 0.0, 1.0) < p;
  } else if (style == 1) {
    const int blobs = uniform_int(rng, 0, 4);
    for (int b = 0; b < blobs; ++b) {
      const int x0 = uniform_int(rng, 0, width - 1), x1 = uniform_int(rng, x0, width - 1);
      const int y0 = uniform_int(rng, 0, height - 1), y1 = uniform_int(rng, y0, height - 1);
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) r.cells[std::size_t(y) * width + x] = 1;
    }
  } else if (style == 2) {
    const bool v = uniform_int(rng, 0, 1) == 1;
    for (auto& c : r.cells) c = v;
  } else {
    bool v = uniform_int(rng, 0, 1) == 1;
    for (auto& c : r.cells) {
      if (uniform_int(rng, 0, 9) == 0) v = !v;
      c = v;
    }
  }
  return r;
}

inline Raster to_raster(const Mask& m) {
  Raster r{m.width(), m.height(), std::vector<std::uint8_t>(std::size_t(m.pixel_count()), 0)};
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) r.cells[std::size_t(y) * m.width() + x] = m.contains(x, y);
  return r;
}

inline Mask columns_mask(int width, int height, int c0, int c1) {
  std::vector<std::uint8_t> cells(std::size_t(width) * height, 0);
  for (int y = 0; y < height; ++y)
    for (int x = c0; x <= c1; ++x) cells[std::size_t(y) * width + x] = 1;
  return rle_encode(cells, width, height);
}

inline Mask rect_mask(int width, int height, int x0, int y0, int x1, int y1, double conf = 1.0) {
  std::vector<std::uint8_t> cells(std::size_t(width) * height, 0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) cells[std::size_t(y) * width + x] = 1;
  return rle_encode(cells, width, height, conf);
}

inline std::int64_t brute_intersection(const Raster& a, const Raster& b) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) n += a.cells[i] && b.cells[i];
  return n;
}

inline std::int64_t brute_union(const Raster& a, const Raster& b) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) n += a.cells[i] || b.cells[i];
  return n;
}

}  // namespace toxmap::testing

#endif  // TOXMAP_TESTS_SUPPORT_HPP
