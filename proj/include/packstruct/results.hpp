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

// Result documents: the serialized form of recognize_image output.
//
// {"image_id": str,
//  "units": [{"unit_id": str, "status": "ok" | "error", "error_kind": str?,
//             "message": str?, "unit_polygon": [[x, y], ...],
//             "n_h_left": int?, "n_h_right": int?, "n_v": int?, "total": int?,
//             "package_category": str?, "pallet_category": str?,
//             "sides": [{"role": "left" | "right", "tetragon": [[x, y] x 4],
//                        "n_h": int, "n_v": int}]?}]}
//
// Tetragon corners are listed top-left, top-right, bottom-right, bottom-left.

#include <string>
#include <string_view>
#include <vector>

#include "packstruct/pipeline.hpp"

namespace packstruct {

struct ResultSide {
  SideRole role = SideRole::kLeft;
  Quad tetragon{};
  int n_h = 0;
  int n_v = 0;
};

struct ResultUnit {
  std::string unit_id;
  bool ok = false;
  std::string error_kind;
  std::string message;
  Polygon polygon;
  CountTriple counts;
  Category package_category = Category::kPkgKlt;
  Category pallet_category = Category::kPalletWood;
  std::vector<ResultSide> sides;
};

struct ResultDocument {
  std::string image_id;
  std::vector<ResultUnit> units;
};

inline ResultDocument to_result_document(const ImageResult& r) {
  ResultDocument doc{r.image_id, {}};
  for (const UnitOutcome& o : r.units) {
    ResultUnit u{o.unit_id, o.ok(), "", "", o.unit_mask, {}, Category::kPkgKlt, Category::kPalletWood, {}};
    if (o.ok()) {
      const PackagingStructure& s = *o.structure;
      u.counts = s.counts();
      u.package_category = s.package_category;
      u.pallet_category = s.pallet_category;
      for (const SideAnalysis& a : s.sides) u.sides.push_back({a.role, a.tetragon.corners(), a.n_h, a.n_v});
    } else {
      u.error_kind = std::string(to_string(o.error->kind()));
      u.message = o.error->what();
    }
    doc.units.push_back(std::move(u));
  }
  return doc;
}

inline Json to_json(const ResultDocument& doc) {
  Json units = Json::array();
  for (const ResultUnit& u : doc.units) {
    Json j{{"unit_id", u.unit_id}, {"status", u.ok ? "ok" : "error"}};
    if (u.ok) {
      j["n_h_left"] = u.counts.h_left;
      j["n_h_right"] = u.counts.h_right;
      j["n_v"] = u.counts.v;
      j["total"] = u.counts.total();
      j["package_category"] = to_string(u.package_category);
      j["pallet_category"] = to_string(u.pallet_category);
      Json sides = Json::array();
      for (const ResultSide& s : u.sides) {
        Json corners = Json::array();
        for (const Point2& c : s.tetragon) corners.push_back({c.x, c.y});
        sides.push_back({{"role", to_string(s.role)}, {"tetragon", std::move(corners)}, {"n_h", s.n_h}, {"n_v", s.n_v}});
      }
      j["sides"] = std::move(sides);
    } else {
      j["error_kind"] = u.error_kind;
      j["message"] = u.message;
    }
    j["unit_polygon"] = detail::polygon_to_json(u.polygon);
    units.push_back(std::move(j));
  }
  return {{"image_id", doc.image_id}, {"units", std::move(units)}};
}

inline ResultDocument parse_result_document(std::string_view document) {
  const Json root = detail::parse_document(document);
  ResultDocument doc{detail::require_string(root, "image_id", "document", -1), {}};
  const Json& list = detail::require(root, "units", "document", -1);
  if (!list.is_array()) detail::fail("units", "expected an array", -1);

  for (std::size_t k = 0; k < list.size(); ++k) {
    const int index = static_cast<int>(k);
    const std::string where = "units[" + std::to_string(k) + "]";
    const Json& j = list[k];
    ResultUnit u{detail::require_string(j, "unit_id", where, index),
                 false,
                 "",
                 "",
                 detail::parse_polygon(detail::require(j, "unit_polygon", where, index), where + ".unit_polygon", index),
                 {},
                 Category::kPkgKlt,
                 Category::kPalletWood,
                 {}};
    const std::string status = detail::require_string(j, "status", where, index);
    if (status == "ok") {
      u.ok = true;
      u.counts = {detail::require_int(j, "n_h_left", where, index), detail::require_int(j, "n_h_right", where, index),
                  detail::require_int(j, "n_v", where, index)};
      if (detail::require_int(j, "total", where, index) != u.counts.total()) {
        detail::fail(where + ".total", "does not equal n_h_left * n_h_right * n_v", index);
      }
      u.package_category = detail::require_category(j, "package_category", where, index);
      u.pallet_category = detail::require_category(j, "pallet_category", where, index);
      if (const auto it = j.find("sides"); it != j.end()) {
        if (!it->is_array()) detail::fail(where + ".sides", "expected an array", index);
        for (const Json& s : *it) {
          ResultSide side;
          const std::string role = detail::require_string(s, "role", where + ".sides", index);
          if (role != "left" && role != "right") detail::fail(where + ".sides.role", "expected left or right", index);
          side.role = role == "left" ? SideRole::kLeft : SideRole::kRight;
          const Json& t = detail::require(s, "tetragon", where + ".sides", index);
          if (!t.is_array() || t.size() != 4) detail::fail(where + ".sides.tetragon", "expected 4 corners", index);
          for (std::size_t c = 0; c < 4; ++c) {
            if (!t[c].is_array() || t[c].size() != 2 || !t[c][0].is_number() || !t[c][1].is_number()) {
              detail::fail(where + ".sides.tetragon", "expected [x, y] number pairs", index);
            }
            side.tetragon[c] = {t[c][0].get<double>(), t[c][1].get<double>()};
          }
          side.n_h = detail::require_int(s, "n_h", where + ".sides", index);
          side.n_v = detail::require_int(s, "n_v", where + ".sides", index);
          u.sides.push_back(side);
        }
      }
    } else if (status == "error") {
      u.error_kind = detail::require_string(j, "error_kind", where, index);
      if (const auto it = j.find("message"); it != j.end() && it->is_string()) u.message = it->get<std::string>();
    } else {
      detail::fail(where + ".status", "expected \"ok\" or \"error\"", index);
    }
    doc.units.push_back(std::move(u));
  }
  return doc;
}

}  // namespace packstruct
