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

#ifndef TOXMAP_IMAGE_HPP
#define TOXMAP_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "toxmap/error.hpp"

namespace toxmap {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kBlack{0, 0, 0};

// 8-bit RGB raster, row-major, interleaved.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = kBlack);
  RgbImage(int width, int height, std::vector<std::uint8_t> interleaved);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::int64_t pixel_count() const noexcept { return std::int64_t(width_) * height_; }

  Rgb at(std::int64_t index) const {
    const auto* p = &data_[std::size_t(index) * 3];
    return {p[0], p[1], p[2]};
  }
  Rgb at(int x, int y) const { return at(std::int64_t(y) * width_ + x); }
  void set(std::int64_t index, Rgb c) {
    auto* p = &data_[std::size_t(index) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void set(int x, int y, Rgb c) { set(std::int64_t(y) * width_ + x, c); }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  bool operator==(const RgbImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// PNG codec. Encoding is deterministic for identical input. Errors raise
// ImageError.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
RgbImage decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_gray16_png(int width, int height,
                                            std::span<const std::uint16_t> values);
std::vector<std::uint16_t> decode_gray16_png(std::span<const std::uint8_t> bytes,
                                             int& width, int& height);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it over the target.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

RgbImage read_png(const std::filesystem::path& path);

}  // namespace toxmap

#endif  // TOXMAP_IMAGE_HPP
