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

// Information consolidation: package-to-side assignment, mask refinement,
// rectification and per-axis counting for one transport unit at a time.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "packstruct/contour.hpp"
#include "packstruct/detections.hpp"
#include "packstruct/homography.hpp"
#include "packstruct/tetragon.hpp"

namespace packstruct {

struct PipelineConfig {
  double delta1 = 0.05;  // horizontal
  double delta2 = 0.15;  // vertical
  FilterConfig filter;
  /// Maximum working raster dimension per unit; 0 keeps native resolution.
  int raster_scale = 0;

  void validate() const {
    if (!(delta1 >= 0.0 && delta1 < 0.5)) throw Error(ErrorKind::kInvalidArgument, "delta1 must lie in [0, 0.5)");
    if (!(delta2 >= 0.0 && delta2 < 0.5)) throw Error(ErrorKind::kInvalidArgument, "delta2 must lie in [0, 0.5)");
    if (raster_scale != 0 && raster_scale < 256) {
      throw Error(ErrorKind::kInvalidArgument, "raster_scale must be 0 (native) or >= 256");
    }
    filter.validate();
  }
};

enum class SideRole { kLeft, kRight };

inline std::string_view to_string(SideRole r) { return r == SideRole::kLeft ? "left" : "right"; }

struct RectifiedBox {
  double w = 0.0;
  double h = 0.0;
};

struct SideAnalysis {
  SideRole role = SideRole::kLeft;
  Tetragon tetragon;
  RectSize rect;
  std::vector<RectifiedBox> package_boxes;
  double ps_h_avg = 0.0;
  double ps_v_avg = 0.0;
  int n_h = 0;
  int n_v = 0;
};

struct PackagingStructure {
  int n_h_left = 0;
  int n_h_right = 0;
  int n_v = 0;
  int total = 0;
  Category package_category = Category::kPkgKlt;
  Category pallet_category = Category::kPalletWood;
  Polygon unit_mask;
  std::array<SideAnalysis, 2> sides;  // left, right; image coordinates

  CountTriple counts() const { return {n_h_left, n_h_right, n_v}; }
};

/// n = floor(extent / ps_avg + 0.5 + delta).
inline int count_axis(double extent, double ps_avg, double delta) {
  if (!(extent > 0.0) || !(ps_avg > 0.0) || !std::isfinite(extent) || !std::isfinite(ps_avg)) {
    throw Error(ErrorKind::kInvalidArgument, "count_axis needs positive extent and package size");
  }
  if (!(delta >= 0.0 && delta < 0.5)) throw Error(ErrorKind::kInvalidArgument, "delta must lie in [0, 0.5)");
  return static_cast<int>(std::floor(extent / ps_avg + 0.5 + delta));
}

// ---------------------------------------------------------------------------
// Working rasters

/// Maps image coordinates into a unit's working raster: p' = (p - origin) * scale.
struct RasterFrame {
  Point2 origin;
  double scale = 1.0;
  int width = 1;
  int height = 1;

  Point2 to_raster(Point2 p) const { return scale * (p - origin); }
  Point2 to_image(Point2 p) const { return origin + (1.0 / scale) * p; }
  Polygon to_raster(const Polygon& poly) const {
    return poly.transformed([this](Point2 p) { return to_raster(p); });
  }
  Polygon to_image(const Polygon& poly) const {
    return poly.transformed([this](Point2 p) { return to_image(p); });
  }

  /// Covers the unit bbox and every member mask, so raster intersections
  /// equal full-image ones.
  static RasterFrame for_unit(const TransportUnitHypothesis& hyp, int raster_scale) {
    Box b = hyp.unit.bbox;
    auto grow = [&b](const Box& o) {
      b.min = {std::min(b.min.x, o.min.x), std::min(b.min.y, o.min.y)};
      b.max = {std::max(b.max.x, o.max.x), std::max(b.max.y, o.max.y)};
    };
    grow(hyp.unit.mask.bounds());
    grow(hyp.pallet.mask.bounds());
    for (const DetectionRecord& s : hyp.sides) grow(s.mask.bounds());
    for (const DetectionRecord& p : hyp.packages) grow(p.mask.bounds());

    RasterFrame f;
    f.origin = {std::floor(b.min.x), std::floor(b.min.y)};
    const double ext_x = std::ceil(b.max.x) - f.origin.x;
    const double ext_y = std::ceil(b.max.y) - f.origin.y;
    const double longest = std::max(ext_x, ext_y);
    if (raster_scale > 0 && longest > raster_scale) f.scale = raster_scale / longest;
    f.width = std::max(1, static_cast<int>(std::ceil(ext_x * f.scale)));
    f.height = std::max(1, static_cast<int>(std::ceil(ext_y * f.scale)));
    return f;
  }
};

/// A raster covering only part of a frame, placed at integer offset (i0, j0).
struct RasterPatch {
  int i0 = 0;
  int j0 = 0;
  BinaryRaster raster{1, 1};

  static RasterPatch of(const Polygon& poly, int frame_width, int frame_height) {
    const Box b = poly.bounds();
    RasterPatch p;
    p.i0 = std::clamp(static_cast<int>(std::floor(b.min.x)), 0, frame_width - 1);
    p.j0 = std::clamp(static_cast<int>(std::floor(b.min.y)), 0, frame_height - 1);
    const int i1 = std::clamp(static_cast<int>(std::ceil(b.max.x)), p.i0 + 1, frame_width);
    const int j1 = std::clamp(static_cast<int>(std::ceil(b.max.y)), p.j0 + 1, frame_height);
    const Point2 shift{static_cast<double>(p.i0), static_cast<double>(p.j0)};
    const std::vector<Point2>& v = poly.vertices();
    std::vector<Point2> local;
    local.reserve(v.size());
    for (const Point2& q : v) local.push_back(q - shift);
    p.raster = rasterize_ring(local, i1 - p.i0, j1 - p.j0).raster;
    return p;
  }

  /// Number of set patch cells also set in `frame`.
  std::int64_t overlap(const BinaryRaster& frame) const {
    std::int64_t n = 0;
    for (int j = 0; j < raster.height(); ++j) {
      for (int i = 0; i < raster.width(); ++i) n += raster.at(i, j) && frame.at(i0 + i, j0 + j);
    }
    return n;
  }
  void intersect(const BinaryRaster& frame) {
    for (int j = 0; j < raster.height(); ++j) {
      for (int i = 0; i < raster.width(); ++i) {
        if (raster.at(i, j) && !frame.at(i0 + i, j0 + j)) raster.set(i, j, false);
      }
    }
  }
  void paint_into(BinaryRaster& frame) const {
    for (int j = 0; j < raster.height(); ++j) {
      for (int i = 0; i < raster.width(); ++i) {
        if (raster.at(i, j)) frame.set(i0 + i, j0 + j);
      }
    }
  }
  /// Outer boundary of the largest component, in frame coordinates.
  Polygon boundary() const {
    const Point2 shift{static_cast<double>(i0), static_cast<double>(j0)};
    return trace_outer_boundary(largest_component(raster)).transformed([&](Point2 q) { return q + shift; });
  }
};

struct UnitRasters {
  RasterFrame frame;
  BinaryRaster unit{1, 1};
  std::array<BinaryRaster, 2> sides{BinaryRaster{1, 1}, BinaryRaster{1, 1}};
  std::vector<RasterPatch> packages;
  std::vector<Polygon> package_polygons;  // frame coordinates
};

inline UnitRasters rasterize_unit(const TransportUnitHypothesis& hyp, int raster_scale) {
  UnitRasters r;
  r.frame = RasterFrame::for_unit(hyp, raster_scale);
  const int w = r.frame.width, h = r.frame.height;
  r.unit = rasterize(r.frame.to_raster(hyp.unit.mask), w, h);
  for (int s = 0; s < 2; ++s) r.sides[s] = rasterize(r.frame.to_raster(hyp.sides[s].mask), w, h);
  for (const DetectionRecord& p : hyp.packages) {
    r.package_polygons.push_back(r.frame.to_raster(p.mask));
    r.packages.push_back(RasterPatch::of(r.package_polygons.back(), w, h));
  }
  return r;
}

/// Package indices per side (indices into hyp.sides), plus dropped ones.
struct PackageAssignment {
  std::array<std::vector<std::size_t>, 2> by_side;
  std::vector<std::size_t> dropped;
};

/// Assigns each package to the side it overlaps most; packages touching no
/// side are dropped. Equal overlaps go to the side whose raw mask centroid
/// lies further left. Throws EmptySide if a side receives nothing.
inline PackageAssignment assign_packages(const UnitRasters& r) {
  int preferred = 0;
  if (!r.sides[0].empty() && !r.sides[1].empty() && r.sides[1].centroid().x < r.sides[0].centroid().x) {
    preferred = 1;
  }
  PackageAssignment out;
  for (std::size_t k = 0; k < r.packages.size(); ++k) {
    const std::int64_t a = r.packages[k].overlap(r.sides[0]);
    const std::int64_t b = r.packages[k].overlap(r.sides[1]);
    if (a == 0 && b == 0) {
      out.dropped.push_back(k);
    } else if (a == b) {
      out.by_side[preferred].push_back(k);
    } else {
      out.by_side[a > b ? 0 : 1].push_back(k);
    }
  }
  for (int s = 0; s < 2; ++s) {
    if (out.by_side[s].empty()) throw Error(ErrorKind::kEmptySide, "no package assigned to side " + std::to_string(s));
  }
  return out;
}

struct RefinedUnit {
  RasterFrame frame;
  std::array<BinaryRaster, 2> sides{BinaryRaster{1, 1}, BinaryRaster{1, 1}};
  std::array<std::vector<Polygon>, 2> packages;  // frame coordinates
};

/// Cuts sides and packages to the unit mask, then grows each side by the
/// union of its (cut) packages. A package the cut leaves untouched keeps its
/// original polygon; a clipped one is re-vectorized by boundary tracing.
/// Packages emptied by the cut are dropped.
inline RefinedUnit refine_masks(UnitRasters r, const PackageAssignment& assignment) {
  RefinedUnit out;
  out.frame = r.frame;
  for (int s = 0; s < 2; ++s) {
    BinaryRaster side = std::move(r.sides[s]);
    side &= r.unit;
    for (const std::size_t k : assignment.by_side[s]) {
      RasterPatch& patch = r.packages[k];
      const std::int64_t before = patch.raster.count();
      const std::int64_t kept = patch.overlap(r.unit);
      if (kept == 0) continue;
      if (kept == before) {
        out.packages[s].push_back(r.package_polygons[k]);
      } else {
        patch.intersect(r.unit);
        out.packages[s].push_back(patch.boundary());
      }
      patch.paint_into(side);
    }
    if (side.empty()) throw Error(ErrorKind::kEmptySideMask, "side " + std::to_string(s) + " is empty after refinement");
    if (out.packages[s].empty()) {
      throw Error(ErrorKind::kEmptySide, "all packages of side " + std::to_string(s) + " lie outside the unit mask");
    }
    out.sides[s] = std::move(side);
  }
  return out;
}

/// Returns {left index, right index} by mask centroid x. Centroids closer
/// than `min_separation` throw AmbiguousSides.
inline std::array<int, 2> identify_left_right(const BinaryRaster& a, const BinaryRaster& b,
                                              double min_separation = 1.0) {
  const double xa = a.centroid().x, xb = b.centroid().x;
  if (std::abs(xa - xb) < min_separation) {
    throw Error(ErrorKind::kAmbiguousSides, "side centroids are less than " + std::to_string(min_separation) + " px apart");
  }
  return xa < xb ? std::array<int, 2>{0, 1} : std::array<int, 2>{1, 0};
}

/// Fits the side tetragon, rectifies every package polygon through the
/// side homography and counts along both axes from the mean rectified
/// bounding-box size.
inline SideAnalysis analyze_side(const Polygon& side_mask, std::span<const Polygon> packages,
                                 const PipelineConfig& cfg) {
  if (packages.empty()) throw Error(ErrorKind::kEmptySide, "side has no packages");
  // Margin lets corners move past the mask without leaving the counted area.
  constexpr int kMargin = 16;
  const Box b = side_mask.bounds();
  const Point2 origin{std::floor(b.min.x) - kMargin, std::floor(b.min.y) - kMargin};
  const int w = static_cast<int>(std::ceil(b.max.x) - origin.x) + kMargin;
  const int h = static_cast<int>(std::ceil(b.max.y) - origin.y) + kMargin;
  const BinaryRaster mask = rasterize(side_mask.transformed([&](Point2 p) { return p - origin; }), w, h);
  const Tetragon local = fit_tetragon(mask);
  Quad corners = local.corners();
  for (Point2& c : corners) c = c + origin;

  SideAnalysis out{SideRole::kLeft, Tetragon(corners), RectSize(1, 1), {}, 0.0, 0.0, 0, 0};
  out.rect = rect_size_for(out.tetragon);
  const Homography to_rect = homography_from_corners(out.tetragon, out.rect);
  for (const Polygon& pkg : packages) {
    const Box r = pkg.transformed([&](Point2 p) { return apply_homography(to_rect, p); }).bounds();
    out.package_boxes.push_back({r.width(), r.height()});
    out.ps_h_avg += r.width();
    out.ps_v_avg += r.height();
  }
  out.ps_h_avg /= static_cast<double>(packages.size());
  out.ps_v_avg /= static_cast<double>(packages.size());
  out.n_h = count_axis(out.rect.s_h, out.ps_h_avg, cfg.delta1);
  out.n_v = count_axis(out.rect.s_v, out.ps_v_avg, cfg.delta2);
  if (out.n_h < 1 || out.n_v < 1) {
    throw Error(ErrorKind::kInvalidArgument, "package boxes exceed the side rectangle", {out.n_h, out.n_v});
  }
  return out;
}

namespace detail {

inline SideAnalysis side_to_image(SideAnalysis s, const RasterFrame& f) {
  Quad corners = s.tetragon.corners();
  for (Point2& c : corners) c = f.to_image(c);
  s.tetragon = Tetragon(corners);
  const double k = 1.0 / f.scale;
  s.rect = RectSize(s.rect.s_h * k, s.rect.s_v * k);
  for (RectifiedBox& box : s.package_boxes) box = {box.w * k, box.h * k};
  s.ps_h_avg *= k;
  s.ps_v_avg *= k;
  return s;
}

}  // namespace detail

/// assign -> refine -> identify left/right -> analyze both sides -> combine.
/// Every error leaving this function carries the unit id.
inline PackagingStructure recognize_unit(const TransportUnitHypothesis& hyp, const PipelineConfig& cfg) {
  try {
    cfg.validate();
    UnitRasters rasters = rasterize_unit(hyp, cfg.raster_scale);
    const PackageAssignment assignment = assign_packages(rasters);
    const RefinedUnit refined = refine_masks(std::move(rasters), assignment);
    const std::array<int, 2> lr = identify_left_right(refined.sides[0], refined.sides[1], refined.frame.scale);

    std::array<std::optional<SideAnalysis>, 2> sides;
    for (int role = 0; role < 2; ++role) {
      const int s = lr[role];
      const Polygon outline = trace_outer_boundary(largest_component(refined.sides[s]));
      SideAnalysis a = analyze_side(outline, refined.packages[s], cfg);
      a.role = role == 0 ? SideRole::kLeft : SideRole::kRight;
      sides[role] = detail::side_to_image(std::move(a), refined.frame);
    }
    if (sides[0]->n_v != sides[1]->n_v) {
      throw Error(ErrorKind::kVerticalCountMismatch,
                  "left side has " + std::to_string(sides[0]->n_v) + " rows, right side " +
                      std::to_string(sides[1]->n_v),
                  {sides[0]->n_v, sides[1]->n_v});
    }
    PackagingStructure out{sides[0]->n_h,
                           sides[1]->n_h,
                           sides[0]->n_v,
                           sides[0]->n_h * sides[1]->n_h * sides[0]->n_v,
                           hyp.packages.front().category,
                           hyp.pallet.category,
                           hyp.unit.mask,
                           {std::move(*sides[0]), std::move(*sides[1])}};
    return out;
  } catch (Error& e) {
    if (e.unit_id().empty()) e.set_unit_id(hyp.unit.id);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Image level

struct UnitOutcome {
  std::string unit_id;
  Polygon unit_mask;
  std::optional<PackagingStructure> structure;
  std::optional<Error> error;

  bool ok() const { return structure.has_value(); }
};

struct ImageResult {
  std::string image_id;
  std::vector<UnitOutcome> units;
};

/// Filters transport units, then assembles and recognizes each one
/// independently. Unit failures are recorded, never propagated.
inline ImageResult recognize_image(const ImageDetections& dets, const PipelineConfig& cfg) {
  cfg.validate();
  ImageResult out{dets.image.id, {}};
  for (const DetectionRecord& unit : filter_transport_units(dets, cfg.filter)) {
    UnitOutcome o{unit.id, unit.mask, std::nullopt, std::nullopt};
    try {
      o.structure = recognize_unit(assemble_unit(unit, dets, cfg.filter), cfg);
    } catch (const Error& e) {
      o.error = e;
    }
    out.units.push_back(std::move(o));
  }
  return out;
}

}  // namespace packstruct
