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

#include "toxmap/artifacts.hpp"

#include <cmath>
#include <fstream>

#include "toxmap/protocol.hpp"

namespace toxmap {
namespace {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ProtocolError(path.string() + ": malformed JSON: " + e.what());
  }
}

double number_at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
    throw ProtocolError(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

std::vector<std::uint8_t> encode_heatmap_png(const Heatmap& hm) {
  std::vector<std::uint16_t> px(std::size_t(hm.values.size()));
  const double* v = hm.values.data();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = std::uint16_t(std::lround(std::clamp(v[i], 0.0, 1.0) * 65535.0));
  return encode_gray16_png(hm.width(), hm.height(), px);
}

Grid<double> decode_heatmap_png(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  const std::vector<std::uint16_t> px = decode_gray16_png(bytes, w, h);
  Grid<double> out(h, w);
  for (std::size_t i = 0; i < px.size(); ++i) out.data()[i] = px[i] / 65535.0;
  return out;
}

json sidecar_json(const PipelineResult& result) {
  json scores = json::array();
  for (const ScoredMask& s : result.scored)
    scores.push_back({{"id", s.id},
                      {"tox_occluded", s.tox_occluded},
                      {"weight", s.weight},
                      {"rle", wire::mask_to_json(s.mask)}});
  return json{{"image_tox", result.heatmap.image_tox},
              {"verdict", result.heatmap.verdict()},
              {"weight_mode", std::string(to_string(result.heatmap.weight_mode))},
              {"scores", scores},
              {"elements", wire::masks_to_json(result.predicted_elements)}};
}

Sidecar parse_sidecar(const json& j) {
  Sidecar s;
  s.image_tox = number_at(j, "image_tox");
  if (!j.contains("verdict") || !j.at("verdict").is_boolean())
    throw ProtocolError("sidecar: missing boolean 'verdict'");
  s.verdict = j.at("verdict").get<bool>();
  if (!j.contains("weight_mode") || !j.at("weight_mode").is_string())
    throw ProtocolError("sidecar: missing 'weight_mode'");
  s.weight_mode = parse_weight_mode(j.at("weight_mode").get<std::string>());
  if (!j.contains("scores") || !j.at("scores").is_array())
    throw ProtocolError("sidecar: missing 'scores'");
  for (const json& e : j.at("scores")) {
    if (!e.contains("id") || !e.at("id").is_string() || !e.contains("rle"))
      throw ProtocolError("sidecar: malformed score entry");
    s.scores.push_back({e.at("id").get<std::string>(), number_at(e, "tox_occluded"),
                        number_at(e, "weight"), wire::mask_from_json(e.at("rle"))});
  }
  if (!j.contains("elements")) throw ProtocolError("sidecar: missing 'elements'");
  s.elements = wire::masks_from_json(j.at("elements"));
  return s;
}

std::string output_stem(const std::filesystem::path& image_path) {
  return image_path.stem().string();
}

void write_result(const std::filesystem::path& out_dir, const std::string& stem,
                  const PipelineResult& result) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / (stem + ".heatmap.png"), encode_heatmap_png(result.heatmap));
  write_file_atomic(out_dir / (stem + ".json"), sidecar_json(result).dump(2) + "\n");
}

std::optional<ImagePrediction> load_prediction(const std::filesystem::path& results_dir,
                                               const std::string& image_path, double tau) {
  const std::string stem = output_stem(image_path);
  const auto sidecar_path = results_dir / (stem + ".json");
  const auto png_path = results_dir / (stem + ".heatmap.png");
  if (!std::filesystem::exists(sidecar_path) || !std::filesystem::exists(png_path))
    return std::nullopt;
  const Sidecar sidecar = parse_sidecar(read_json_file(sidecar_path));
  Heatmap hm;
  hm.values = decode_heatmap_png(read_file(png_path));
  hm.image_tox = sidecar.image_tox;
  hm.weight_mode = sidecar.weight_mode;
  return prediction_from_heatmap(hm, tau);
}

std::map<std::string, ImagePrediction> read_box_predictions(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (!j.contains("images") || !j.at("images").is_array())
    throw ProtocolError("box predictions: missing 'images' array");
  std::map<std::string, ImagePrediction> out;
  for (const json& e : j.at("images")) {
    if (!e.contains("path") || !e.at("path").is_string())
      throw ProtocolError("box predictions: entry without 'path'");
    ImagePrediction p;
    p.image_tox = number_at(e, "image_tox");
    if (e.contains("box") && !e.at("box").is_null()) {
      const json& b = e.at("box");
      if (!b.is_array() || b.size() != 4)
        throw ProtocolError("box predictions: 'box' must be [x_min,y_min,x_max,y_max]");
      for (const json& v : b)
        if (!v.is_number_integer()) throw ProtocolError("box predictions: coordinates must be integers");
      p.box = Box{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()};
    }
    out[e.at("path").get<std::string>()] = std::move(p);
  }
  return out;
}

RgbImage boundary_preview(const RgbImage& image, std::span<const Mask> regions, Rgb color) {
  RgbImage out = image;
  for (const Mask& region : regions) {
    if (region.width() != image.width() || region.height() != image.height())
      throw DimensionError("preview region does not match the image");
    const int w = region.width(), h = region.height();
    region.for_each_interval([&](std::int64_t b, std::int64_t e) {
      for (std::int64_t p = b; p < e; ++p) {
        const int x = int(p % w), y = int(p / w);
        const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 ||
                          !region.contains(x - 1, y) || !region.contains(x + 1, y) ||
                          !region.contains(x, y - 1) || !region.contains(x, y + 1);
        if (edge) out.set(x, y, color);
      }
    });
  }
  return out;
}

}  // namespace toxmap
