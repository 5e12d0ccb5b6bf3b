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

// SVG overlays of recognition results in image coordinates.

#include <algorithm>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "packstruct/results.hpp"

namespace packstruct {

struct Segment {
  Point2 a;
  Point2 b;
};

struct SideGrid {
  std::vector<Segment> vertical;    // column separators
  std::vector<Segment> horizontal;  // row separators
};

/// Interior row and column separators of a side: the lines u = k / n_h and
/// v = k / n_v of the rectified side, mapped back onto the tetragon.
inline SideGrid side_grid(const ResultSide& side) {
  const Quad square{Point2{0.0, 0.0}, Point2{1.0, 0.0}, Point2{1.0, 1.0}, Point2{0.0, 1.0}};
  const Homography back = homography_between(square, side.tetragon);
  auto map = [&](double u, double v) { return apply_homography(back, {u, v}); };
  SideGrid g;
  for (int k = 1; k < side.n_h; ++k) {
    const double u = static_cast<double>(k) / side.n_h;
    g.vertical.push_back({map(u, 0.0), map(u, 1.0)});
  }
  for (int k = 1; k < side.n_v; ++k) {
    const double v = static_cast<double>(k) / side.n_v;
    g.horizontal.push_back({map(0.0, v), map(1.0, v)});
  }
  return g;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string points_attr(std::span<const Point2> pts) {
  std::string out;
  for (const Point2& p : pts) {
    if (!out.empty()) out += ' ';
    out += num(p.x) + "," + num(p.y);
  }
  return out;
}

inline std::string line(const Segment& s, const char* stroke) {
  return "    <line x1=\"" + num(s.a.x) + "\" y1=\"" + num(s.a.y) + "\" x2=\"" + num(s.b.x) + "\" y2=\"" + num(s.b.y) +
         "\" stroke=\"" + stroke + "\" stroke-width=\"2\"/>\n";
}

}  // namespace detail

/// Unit polygons, fitted side tetragons (red), interior grid lines (yellow)
/// and a count label per unit. Failed units get their error kind instead.
inline std::string render_svg(const ImageInfo& image, const ResultDocument& result) {
  if (image.id != result.image_id) {
    throw Error(ErrorKind::kPairingError,
                "detections are for image '" + image.id + "' but results are for '" + result.image_id + "'");
  }
  using detail::num;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(image.width) + "\" height=\"" +
         std::to_string(image.height) + "\" viewBox=\"0 0 " + std::to_string(image.width) + " " +
         std::to_string(image.height) + "\">\n";
  out += "  <title>" + detail::xml_escape(image.id) + "</title>\n";
  for (const ResultUnit& u : result.units) {
    out += "  <g id=\"" + detail::xml_escape(u.unit_id) + "\">\n";
    out += "    <polygon points=\"" + detail::points_attr(u.polygon.vertices()) +
           "\" fill=\"none\" stroke=\"" + (u.ok ? "lime" : "gray") + "\" stroke-width=\"2\"/>\n";
    std::string label;
    if (u.ok) {
      for (const ResultSide& s : u.sides) {
        out += "    <polygon class=\"tetragon " + std::string(to_string(s.role)) + "\" points=\"" +
               detail::points_attr(s.tetragon) + "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
        const SideGrid g = side_grid(s);
        for (const Segment& seg : g.vertical) out += detail::line(seg, "yellow");
        for (const Segment& seg : g.horizontal) out += detail::line(seg, "yellow");
      }
      label = std::to_string(u.counts.h_left) + " × " + std::to_string(u.counts.h_right) + " × " +
              std::to_string(u.counts.v) + " = " + std::to_string(u.counts.total());
    } else {
      label = u.error_kind;
    }
    const Box b = u.polygon.bounds();
    out += "    <text x=\"" + num(b.min.x) + "\" y=\"" + num(std::max(14.0, b.min.y - 6.0)) +
           "\" font-family=\"sans-serif\" font-size=\"20\" fill=\"yellow\">" + detail::xml_escape(label) +
           "</text>\n";
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace packstruct
