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

#include "toxmap/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "toxmap/protocol.hpp"

namespace toxmap {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ProtocolError(std::string("manifest: missing field '") + key + "'");
  return j.at(key);
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw ProtocolError(std::string("manifest: '") + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t covered_pixels(const Mask& gt, const Grid<double>& normalized, double tau) {
  if (normalized.rows() != gt.height() || normalized.cols() != gt.width())
    throw DimensionError("heatmap does not match the ground-truth mask");
  const double* flat = normalized.data();
  std::int64_t covered = 0;
  gt.for_each_interval([&](std::int64_t b, std::int64_t e) {
    for (std::int64_t p = b; p < e; ++p)
      if (flat[p] >= tau) ++covered;
  });
  return covered;
}

std::optional<double> ratio(int num, int den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json counts_to_json(const MetricCounts& c, EvalMode mode) {
  json j{{"recall", optional_json(c.recall())},
         {"precision", optional_json(c.precision())},
         {"fpr", optional_json(c.fpr())},
         {"counts",
          {{"gt_elements", c.gt_elements},
           {"detected", c.detected},
           {"predicted_regions", c.predicted_regions},
           {"tp_regions", c.tp_regions},
           {"images_without_predictions", c.images_without_predictions},
           {"benign_total", c.benign_total},
           {"false_positives", c.false_positives}}}};
  if (mode == EvalMode::bbox)
    j["bbox_types"] = {{"type1", c.bbox_types[0]},
                       {"type2", c.bbox_types[1]},
                       {"type3", c.bbox_types[2]},
                       {"type4", c.bbox_types[3]}};
  return j;
}

void accumulate(MetricCounts& into, const MetricCounts& from) {
  into.gt_elements += from.gt_elements;
  into.detected += from.detected;
  into.predicted_regions += from.predicted_regions;
  into.tp_regions += from.tp_regions;
  into.images_without_predictions += from.images_without_predictions;
  into.benign_total += from.benign_total;
  into.false_positives += from.false_positives;
  for (std::size_t i = 0; i < 4; ++i) into.bbox_types[i] += from.bbox_types[i];
}

}  // namespace

void DatasetManifest::validate() const {
  for (const ManifestImage& img : images) {
    if (img.harmful && img.elements.empty())
      throw InvalidGroundTruth("harmful image '" + img.path + "' has no elements");
    if (!img.harmful && !img.elements.empty())
      throw InvalidGroundTruth("benign image '" + img.path + "' has elements");
    for (const ManifestElement& e : img.elements) {
      if (e.mask.is_empty())
        throw InvalidGroundTruth("element '" + e.name + "' of '" + img.path + "' is empty");
      require_same_dims(img.elements.front().mask, e.mask);
    }
  }
}

json manifest_to_json(const DatasetManifest& manifest) {
  json images = json::array();
  for (const ManifestImage& img : manifest.images) {
    json elements = json::array();
    for (const ManifestElement& e : img.elements)
      elements.push_back({{"name", e.name}, {"mask", wire::mask_to_json(e.mask)}});
    images.push_back({{"path", img.path},
                      {"label", img.harmful ? "harmful" : "benign"},
                      {"category", img.category},
                      {"elements", elements}});
  }
  json j{{"images", images}};
  if (!manifest.metadata.empty()) j["metadata"] = manifest.metadata;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  const json& images = require(j, "images");
  if (!images.is_array()) throw ProtocolError("manifest: 'images' must be an array");
  for (const json& ji : images) {
    ManifestImage img;
    img.path = require_string(ji, "path");
    const std::string label = require_string(ji, "label");
    if (label != "harmful" && label != "benign")
      throw ProtocolError("manifest: label must be 'harmful' or 'benign'");
    img.harmful = label == "harmful";
    img.category = require_string(ji, "category");
    const json& elements = require(ji, "elements");
    if (!elements.is_array()) throw ProtocolError("manifest: 'elements' must be an array");
    for (const json& je : elements)
      img.elements.push_back({require_string(je, "name"), wire::mask_from_json(require(je, "mask"))});
    m.images.push_back(std::move(img));
  }
  if (j.contains("metadata")) m.metadata = j.at("metadata");
  m.validate();
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProtocolError("cannot open manifest " + path.string());
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("manifest: malformed JSON: ") + e.what());
  }
}

bool element_detected(const Mask& gt, const Grid<double>& normalized, double tau) {
  if (gt.is_empty()) throw InvalidGroundTruth("empty ground-truth element");
  return 2 * covered_pixels(gt, normalized, tau) >= gt.area();
}

bool element_detected(const Mask& gt, const Heatmap& hm, double tau) {
  return element_detected(gt, hm.normalized(), tau);
}

RegionCounts region_precision(std::span<const Mask> predicted, const Mask& gt_union) {
  RegionCounts c;
  for (const Mask& region : predicted) {
    if (region.is_empty()) continue;
    ++c.total;
    if (2 * intersection_area(region, gt_union) >= region.area()) ++c.tp;
  }
  return c;
}

bool bbox_detected(const Box& pred, const Mask& gt) {
  if (pred.x_max < pred.x_min || pred.y_max < pred.y_min)
    throw InvalidBox("predicted box has zero area");
  return box_iou(pred, geometry(gt).bbox) > 0.5;
}

BboxType classify_bbox_type(const Box& pred, std::span<const Mask> gt_elements, int img_w,
                            int img_h) {
  if (gt_elements.empty()) throw InvalidGroundTruth("bbox type needs at least one element");
  if (pred.x_max < pred.x_min || pred.y_max < pred.y_min)
    throw InvalidBox("predicted box has zero area");
  const Mask box = box_mask(pred, img_w, img_h);
  std::size_t marked = 0;
  for (const Mask& e : gt_elements)
    if (2 * intersection_area(box, e) >= e.area()) ++marked;
  if (marked == 0) return BboxType::type1;
  if (marked < gt_elements.size()) return BboxType::type2;
  if (double(box.area()) > 0.80 * double(std::int64_t(img_w) * img_h)) return BboxType::type3;
  return BboxType::type4;
}

double compute_fpr(std::span<const double> image_toxes) {
  if (image_toxes.empty()) throw EmptyBenignSet("no benign images");
  std::size_t flagged = 0;
  for (double t : image_toxes)
    if (t > 0.5) ++flagged;
  return double(flagged) / double(image_toxes.size());
}

ImagePrediction prediction_from_heatmap(const Heatmap& hm, double tau) {
  ImagePrediction p;
  p.image_tox = hm.image_tox;
  p.normalized = hm.normalized();
  p.regions = connected_components(p.normalized >= tau);
  return p;
}

std::optional<double> MetricCounts::recall() const { return ratio(detected, gt_elements); }
std::optional<double> MetricCounts::precision() const {
  return ratio(tp_regions, predicted_regions);
}
std::optional<double> MetricCounts::fpr() const { return ratio(false_positives, benign_total); }

EvalReport build_report(const DatasetManifest& manifest,
                        const std::map<std::string, ImagePrediction>& predictions, EvalMode mode,
                        double tau) {
  std::vector<std::string> missing;
  for (const ManifestImage& img : manifest.images)
    if (!predictions.contains(img.path)) missing.push_back(img.path);
  if (!missing.empty()) throw IncompleteRun(std::move(missing));

  EvalReport report;
  report.mode = mode;
  report.tau = tau;
  for (const ManifestImage& img : manifest.images) {
    const ImagePrediction& pred = predictions.at(img.path);
    MetricCounts c;
    if (!img.harmful) {
      c.benign_total = 1;
      c.false_positives = pred.image_tox > 0.5 ? 1 : 0;
    } else {
      std::vector<Mask> gts;
      for (const ManifestElement& e : img.elements) gts.push_back(e.mask);
      const Mask gt_union = mask_union(gts);
      const int w = gt_union.width(), h = gt_union.height();
      c.gt_elements = int(gts.size());
      RegionCounts rc;
      if (mode == EvalMode::mask) {
        for (const Mask& g : gts) c.detected += element_detected(g, pred.normalized, tau) ? 1 : 0;
        rc = region_precision(pred.regions, gt_union);
      } else {
        if (pred.box) {
          for (const Mask& g : gts) c.detected += bbox_detected(*pred.box, g) ? 1 : 0;
          const Mask box = box_mask(*pred.box, w, h);
          rc = region_precision(std::span(&box, 1), gt_union);
          c.bbox_types[std::size_t(classify_bbox_type(*pred.box, gts, w, h)) - 1] += 1;
        } else {
          c.bbox_types[0] += 1;
        }
      }
      c.tp_regions = rc.tp;
      c.predicted_regions = rc.total;
      if (rc.total == 0) c.images_without_predictions = 1;
    }
    accumulate(report.per_category[img.category], c);
    accumulate(report.overall, c);
  }
  return report;
}

json report_to_json(const EvalReport& report) {
  json categories = json::object();
  for (const auto& [name, c] : report.per_category) categories[name] = counts_to_json(c, report.mode);
  return json{{"mode", report.mode == EvalMode::mask ? "mask" : "bbox"},
              {"tau", report.tau},
              {"overall", counts_to_json(report.overall, report.mode)},
              {"categories", categories}};
}

std::string report_to_table(const EvalReport& report) {
  std::vector<std::pair<std::string, const MetricCounts*>> columns;
  for (const auto& [name, c] : report.per_category) {
    std::string label = name;
    if (!label.empty()) label[0] = char(std::toupper(static_cast<unsigned char>(label[0])));
    columns.emplace_back(label, &c);
  }
  columns.emplace_back("Overall", &report.overall);

  std::ostringstream out;
  auto cell = [](const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %-10s|", s.c_str());
    return std::string(buf);
  };
  auto rate = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  auto row = [&](const std::string& metric, auto value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-22s|", metric.c_str());
    out << buf;
    for (const auto& [label, c] : columns) out << cell(value(*c));
    out << '\n';
  };
  row("Metrics", [&, i = std::size_t(0)](const MetricCounts&) mutable {
    return columns[i++].first;
  });
  row("Recall", [&](const MetricCounts& c) { return rate(c.recall()); });
  row("Precision", [&](const MetricCounts& c) { return rate(c.precision()); });
  row("FPR", [&](const MetricCounts& c) { return rate(c.fpr()); });
  if (report.mode == EvalMode::bbox) {
    const char* names[] = {"Type 1 (incorrect)", "Type 2 (partial)", "Type 3 (excessive)",
                           "Type 4 (perfect)"};
    for (std::size_t t = 0; t < 4; ++t)
      row(names[t], [&](const MetricCounts& c) { return std::to_string(c.bbox_types[t]); });
  }
  out << "(mode " << (report.mode == EvalMode::mask ? "mask" : "bbox") << ", tau " << report.tau
      << "; segment success rate requires human review and is not computed)\n";
  return out.str();
}

}  // namespace toxmap
