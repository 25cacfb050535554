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

#include "toxmap/image.hpp"

#include <png.h>

#include <atomic>
#include <fstream>
#include <iterator>
#include <thread>

namespace toxmap {
namespace {

// RAII wrapper over libpng's simplified API control block.
struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> write_png(png_image& image, const void* buffer,
                                    png_int_32 row_stride) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, row_stride,
                                 nullptr))
    throw ImageError(std::string("png encode: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer,
                                 row_stride, nullptr))
    throw ImageError(std::string("png encode: ") + image.message);
  out.resize(size);
  return out;
}

void begin_read(PngImage& png, std::span<const std::uint8_t> bytes) {
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size()))
    throw ImageError(std::string("png decode: ") + png.image.message);
}

}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill)
    : width_(width), height_(height),
      data_(std::size_t(std::max(width, 0)) * std::size_t(std::max(height, 0)) * 3) {
  if (width < 1 || height < 1) throw ImageError("image dimensions must be positive");
  for (std::int64_t i = 0; i < pixel_count(); ++i) set(i, fill);
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
  if (width < 1 || height < 1) throw ImageError("image dimensions must be positive");
  if (std::int64_t(data_.size()) != pixel_count() * 3)
    throw ImageError("pixel buffer size does not match dimensions");
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  PngImage png;
  png.image.width = png_uint_32(image.width());
  png.image.height = png_uint_32(image.height());
  png.image.format = PNG_FORMAT_RGB;
  return write_png(png.image, image.data().data(), 0);
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  PngImage png;
  begin_read(png, bytes);
  png.image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr))
    throw ImageError(std::string("png decode: ") + png.image.message);
  return RgbImage(int(png.image.width), int(png.image.height), std::move(buffer));
}

std::vector<std::uint8_t> encode_gray16_png(int width, int height,
                                            std::span<const std::uint16_t> values) {
  if (std::int64_t(values.size()) != std::int64_t(width) * height)
    throw ImageError("gray16 buffer size does not match dimensions");
  PngImage png;
  png.image.width = png_uint_32(width);
  png.image.height = png_uint_32(height);
  png.image.format = PNG_FORMAT_LINEAR_Y;
  return write_png(png.image, values.data(), 0);
}

std::vector<std::uint16_t> decode_gray16_png(std::span<const std::uint8_t> bytes,
                                             int& width, int& height) {
  PngImage png;
  begin_read(png, bytes);
  png.image.format = PNG_FORMAT_LINEAR_Y;
  std::vector<std::uint16_t> buffer(PNG_IMAGE_SIZE(png.image) / 2);
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr))
    throw ImageError(std::string("png decode: ") + png.image.message);
  width = int(png.image.width);
  height = int(png.image.height);
  return buffer;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) +
         "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    if (!out) throw ImageError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                    text.size()));
}

RgbImage read_png(const std::filesystem::path& path) {
  return decode_png(read_file(path));
}

}  // namespace toxmap
