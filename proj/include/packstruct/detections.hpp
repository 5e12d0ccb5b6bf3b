// Copyright 2026 The packstruct Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Detection and annotation documents, plus the sanity filters applied to
// instance-segmentation output before consolidation.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "packstruct/geometry.hpp"

namespace packstruct {

using Json = nlohmann::json;

enum class Category { kTransportUnit, kTuSide, kPkgKlt, kPkgTray, kPalletWood, kPalletPlastic };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::kTransportUnit: return "transport_unit";
    case Category::kTuSide: return "tu_side";
    case Category::kPkgKlt: return "pkg_klt";
    case Category::kPkgTray: return "pkg_tray";
    case Category::kPalletWood: return "pallet_wood";
    case Category::kPalletPlastic: return "pallet_plastic";
  }
  return "unknown";
}

inline std::optional<Category> category_from_string(std::string_view s) {
  for (Category c : {Category::kTransportUnit, Category::kTuSide, Category::kPkgKlt, Category::kPkgTray,
                     Category::kPalletWood, Category::kPalletPlastic}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

inline bool is_package(Category c) { return c == Category::kPkgKlt || c == Category::kPkgTray; }
inline bool is_pallet(Category c) { return c == Category::kPalletWood || c == Category::kPalletPlastic; }

struct DetectionRecord {
  std::string id;
  Category category;
  double confidence;
  Box bbox;
  Polygon mask;
};

struct ImageInfo {
  std::string id;
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct ImageDetections {
  ImageInfo image;
  std::vector<DetectionRecord> records;
};

/// Thresholds for the inter- and intra-unit sanity checks. The fractions
/// are relative to the image size (min_size_frac), to a member's own bbox
/// area (containment_frac) and to the unit bbox area (min_side_area_frac).
struct FilterConfig {
  double min_confidence_tu = 0.5;
  double min_confidence_intra = 0.5;
  double min_size_frac = 0.05;
  double suppression_iou = 0.8;
  double containment_frac = 0.6;
  double min_side_area_frac = 0.02;

  void validate() const {
    auto check_fraction = [](double v, const char* name) {
      if (!(v > 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, std::string(name) + " must lie in (0, 1]");
      }
    };
    check_fraction(min_confidence_tu, "min_confidence_tu");
    check_fraction(min_confidence_intra, "min_confidence_intra");
    check_fraction(min_size_frac, "min_size_frac");
    check_fraction(suppression_iou, "suppression_iou");
    check_fraction(containment_frac, "containment_frac");
    check_fraction(min_side_area_frac, "min_side_area_frac");
  }
};

struct TransportUnitHypothesis {
  DetectionRecord unit;
  DetectionRecord pallet;
  std::array<DetectionRecord, 2> sides;
  std::vector<DetectionRecord> packages;
};

// ---------------------------------------------------------------------------
// Documents

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what, int index) {
  throw ParseError(where + ": " + what, index);
}

inline const Json& require(const Json& obj, const char* key, const std::string& where, int index) {
  if (!obj.is_object()) fail(where, "expected an object", index);
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'", index);
  return *it;
}

inline double require_number(const Json& obj, const char* key, const std::string& where, int index) {
  const Json& v = require(obj, key, where, index);
  if (!v.is_number()) fail(where + "." + key, "expected a number", index);
  return v.get<double>();
}

inline int require_int(const Json& obj, const char* key, const std::string& where, int index) {
  const Json& v = require(obj, key, where, index);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer", index);
  return v.get<int>();
}

inline std::string require_string(const Json& obj, const char* key, const std::string& where, int index) {
  const Json& v = require(obj, key, where, index);
  if (!v.is_string()) fail(where + "." + key, "expected a string", index);
  return v.get<std::string>();
}

inline Category require_category(const Json& obj, const char* key, const std::string& where, int index) {
  const std::string s = require_string(obj, key, where, index);
  const auto c = category_from_string(s);
  if (!c) fail(where + "." + key, "unknown category '" + s + "'", index);
  return *c;
}

inline Polygon parse_polygon(const Json& v, const std::string& where, int index) {
  if (!v.is_array()) fail(where, "expected an array of [x, y] points", index);
  std::vector<Point2> ring;
  for (const Json& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      fail(where, "expected [x, y] number pairs", index);
    }
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  try {
    return Polygon::from_ring(std::move(ring));
  } catch (const Error& e) {
    fail(where, e.what(), index);
  }
}

inline Json polygon_to_json(const Polygon& poly) {
  Json out = Json::array();
  for (const Point2& p : poly.vertices()) out.push_back({p.x, p.y});
  return out;
}

inline Json parse_document(std::string_view document) {
  try {
    return Json::parse(document.begin(), document.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

inline ImageInfo parse_image_info(const Json& root) {
  const Json& image = require(root, "image", "document", -1);
  ImageInfo info{require_string(image, "id", "image", -1), require_int(image, "width", "image", -1),
                 require_int(image, "height", "image", -1)};
  if (info.width < 1 || info.height < 1) fail("image", "width and height must be >= 1", -1);
  return info;
}

inline Json image_info_to_json(const ImageInfo& info) {
  return {{"id", info.id}, {"width", info.width}, {"height", info.height}};
}

}  // namespace detail

/// Parses and validates a detection document:
/// {"image": {"id", "width", "height"},
///  "detections": [{"id", "category", "confidence", "bbox", "polygon"}]}.
/// Failures name the offending field and carry the record index.
inline ImageDetections parse_image_detections(std::string_view document) {
  const Json root = detail::parse_document(document);
  ImageDetections out{detail::parse_image_info(root), {}};
  const Json& list = detail::require(root, "detections", "document", -1);
  if (!list.is_array()) detail::fail("detections", "expected an array", -1);

  for (std::size_t k = 0; k < list.size(); ++k) {
    const int index = static_cast<int>(k);
    const std::string where = "detections[" + std::to_string(k) + "]";
    const Json& rec = list[k];
    std::string id = detail::require_string(rec, "id", where, index);
    const Category category = detail::require_category(rec, "category", where, index);
    const double confidence = detail::require_number(rec, "confidence", where, index);
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
      detail::fail(where + ".confidence", "value " + std::to_string(confidence) + " outside [0, 1]", index);
    }

    const Json& bb = detail::require(rec, "bbox", where, index);
    if (!bb.is_array() || bb.size() != 4 || !std::all_of(bb.begin(), bb.end(), [](const Json& v) { return v.is_number(); })) {
      detail::fail(where + ".bbox", "expected [x_min, y_min, x_max, y_max]", index);
    }
    const Box bbox{{bb[0].get<double>(), bb[1].get<double>()}, {bb[2].get<double>(), bb[3].get<double>()}};
    if (!(bbox.min.x < bbox.max.x && bbox.min.y < bbox.max.y)) {
      detail::fail(where + ".bbox", "requires x_min < x_max and y_min < y_max", index);
    }
    if (bbox.min.x < 0.0 || bbox.min.y < 0.0 || bbox.max.x > out.image.width || bbox.max.y > out.image.height) {
      detail::fail(where + ".bbox", "outside the image bounds", index);
    }

    Polygon mask = detail::parse_polygon(detail::require(rec, "polygon", where, index), where + ".polygon", index);
    // The mask may exceed the declared box by the box scaled 1.05x about its center.
    const Box mb = mask.bounds();
    const double sx = 0.025 * bbox.width(), sy = 0.025 * bbox.height();
    if (mb.min.x < bbox.min.x - sx || mb.max.x > bbox.max.x + sx || mb.min.y < bbox.min.y - sy ||
        mb.max.y > bbox.max.y + sy) {
      detail::fail(where + ".polygon", "mask extends beyond 1.05x the declared bbox", index);
    }
    out.records.push_back({std::move(id), category, confidence, bbox, std::move(mask)});
  }
  return out;
}

inline Json to_json(const ImageDetections& dets) {
  Json list = Json::array();
  for (const DetectionRecord& r : dets.records) {
    list.push_back({{"id", r.id},
                    {"category", to_string(r.category)},
                    {"confidence", r.confidence},
                    {"bbox", {r.bbox.min.x, r.bbox.min.y, r.bbox.max.x, r.bbox.max.y}},
                    {"polygon", detail::polygon_to_json(r.mask)}});
  }
  return {{"image", detail::image_info_to_json(dets.image)}, {"detections", std::move(list)}};
}

struct CountTriple {
  int h_left = 1;
  int h_right = 1;
  int v = 1;

  int total() const { return h_left * h_right * v; }
  CountTriple mirrored() const { return {h_right, h_left, v}; }
  friend bool operator==(const CountTriple&, const CountTriple&) = default;
};

struct AnnotatedUnit {
  Polygon polygon;
  Category pallet_category;
  Category package_category;
  CountTriple counts;
};

struct ImageAnnotations {
  ImageInfo image;
  std::vector<AnnotatedUnit> units;
};

/// Parses a ground-truth document: the detection envelope with
/// "units": [{"polygon", "pallet_category", "package_category",
///            "counts": {"h_left", "h_right", "v"}}].
inline ImageAnnotations parse_annotations(std::string_view document) {
  const Json root = detail::parse_document(document);
  ImageAnnotations out{detail::parse_image_info(root), {}};
  const Json& list = detail::require(root, "units", "document", -1);
  if (!list.is_array()) detail::fail("units", "expected an array", -1);

  for (std::size_t k = 0; k < list.size(); ++k) {
    const int index = static_cast<int>(k);
    const std::string where = "units[" + std::to_string(k) + "]";
    const Json& u = list[k];
    Polygon polygon = detail::parse_polygon(detail::require(u, "polygon", where, index), where + ".polygon", index);
    const Category pallet = detail::require_category(u, "pallet_category", where, index);
    if (!is_pallet(pallet)) detail::fail(where + ".pallet_category", "not a pallet category", index);
    const Category package = detail::require_category(u, "package_category", where, index);
    if (!is_package(package)) detail::fail(where + ".package_category", "not a package category", index);
    const Json& counts = detail::require(u, "counts", where, index);
    const CountTriple triple{detail::require_int(counts, "h_left", where + ".counts", index),
                             detail::require_int(counts, "h_right", where + ".counts", index),
                             detail::require_int(counts, "v", where + ".counts", index)};
    if (triple.h_left < 1 || triple.h_right < 1 || triple.v < 1) {
      detail::fail(where + ".counts", "counts must be >= 1", index);
    }
    out.units.push_back({std::move(polygon), pallet, package, triple});
  }
  return out;
}

inline Json to_json(const ImageAnnotations& ann) {
  Json list = Json::array();
  for (const AnnotatedUnit& u : ann.units) {
    list.push_back({{"polygon", detail::polygon_to_json(u.polygon)},
                    {"pallet_category", to_string(u.pallet_category)},
                    {"package_category", to_string(u.package_category)},
                    {"counts", {{"h_left", u.counts.h_left}, {"h_right", u.counts.h_right}, {"v", u.counts.v}}}});
  }
  return {{"image", detail::image_info_to_json(ann.image)}, {"units", std::move(list)}};
}

// ---------------------------------------------------------------------------
// Filters

/// Fraction of `member`'s area lying inside `unit`.
inline double containment_fraction(const Box& member, const Box& unit) {
  const double area = member.area();
  return area > 0.0 ? intersection_area(member, unit) / area : 0.0;
}

namespace detail {

inline bool by_confidence_then_id(const DetectionRecord& a, const DetectionRecord& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.id < b.id;
}

}  // namespace detail

/// Inter-unit sanity checks: confidence threshold, minimum extent in each
/// image direction, then greedy confidence-ordered suppression of boxes
/// overlapping a kept box by more than `suppression_iou`.
inline std::vector<DetectionRecord> filter_transport_units(const ImageDetections& dets, const FilterConfig& cfg) {
  cfg.validate();
  std::vector<DetectionRecord> candidates;
  for (const DetectionRecord& r : dets.records) {
    if (r.category != Category::kTransportUnit || r.confidence < cfg.min_confidence_tu) continue;
    if (r.bbox.width() < cfg.min_size_frac * dets.image.width) continue;
    if (r.bbox.height() < cfg.min_size_frac * dets.image.height) continue;
    candidates.push_back(r);
  }
  std::sort(candidates.begin(), candidates.end(), detail::by_confidence_then_id);

  std::vector<DetectionRecord> kept;
  for (DetectionRecord& r : candidates) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const DetectionRecord& k) {
      return box_iou(r.bbox, k.bbox) > cfg.suppression_iou;
    });
    if (!suppressed) kept.push_back(std::move(r));
  }
  return kept;
}

/// Collects the intra-unit detections belonging to `unit`: confident
/// records whose bbox lies at least `containment_frac` inside the unit bbox,
/// with sides additionally required to cover `min_side_area_frac` of it.
/// Exactly one pallet and two sides must remain and packages must share a
/// category; otherwise PalletCountError, SideCountError or
/// MixedPackageCategories is thrown for this unit.
inline TransportUnitHypothesis assemble_unit(const DetectionRecord& unit, const ImageDetections& dets,
                                             const FilterConfig& cfg) {
  cfg.validate();
  std::vector<DetectionRecord> pallets, sides, packages;
  const double unit_area = unit.bbox.area();
  for (const DetectionRecord& r : dets.records) {
    if (r.category == Category::kTransportUnit) continue;
    if (r.confidence < cfg.min_confidence_intra) continue;
    if (containment_fraction(r.bbox, unit.bbox) < cfg.containment_frac) continue;
    if (r.category == Category::kTuSide) {
      if (r.mask.area() < cfg.min_side_area_frac * unit_area) continue;
      sides.push_back(r);
    } else if (is_pallet(r.category)) {
      pallets.push_back(r);
    } else {
      packages.push_back(r);
    }
  }
  auto by_id = [](const DetectionRecord& a, const DetectionRecord& b) { return a.id < b.id; };
  std::sort(sides.begin(), sides.end(), by_id);
  std::sort(packages.begin(), packages.end(), by_id);

  auto tagged = [&](Error e) {
    e.set_unit_id(unit.id);
    return e;
  };
  if (pallets.size() != 1) {
    const int k = static_cast<int>(pallets.size());
    throw tagged(Error(ErrorKind::kPalletCountError, "expected 1 pallet, found " + std::to_string(k), {k}));
  }
  if (sides.size() != 2) {
    const int k = static_cast<int>(sides.size());
    throw tagged(Error(ErrorKind::kSideCountError, "expected 2 sides, found " + std::to_string(k), {k}));
  }
  for (const DetectionRecord& p : packages) {
    if (p.category != packages.front().category) {
      throw tagged(Error(ErrorKind::kMixedPackageCategories, "packages of more than one category"));
    }
  }
  return {unit, std::move(pallets.front()), {std::move(sides[0]), std::move(sides[1])}, std::move(packages)};
}

}  // namespace packstruct
