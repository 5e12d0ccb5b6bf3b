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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "packstruct/error.hpp"

namespace packstruct {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Distance from `p` to the closed segment [a, b].
inline double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

/// Axis-aligned box; `min`/`max` are inclusive corners.
struct Box {
  Point2 min;
  Point2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  Point2 center() const { return 0.5 * (min + max); }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
  const double h = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

inline double box_iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

/// Componentwise min/max of a nonempty point range.
template <std::ranges::input_range R>
  requires std::same_as<std::ranges::range_value_t<R>, Point2>
Box axis_aligned_bbox(const R& points) {
  auto it = std::ranges::begin(points);
  const auto end = std::ranges::end(points);
  if (it == end) throw Error(ErrorKind::kEmptyInput, "bounding box of an empty point set");
  Box box{*it, *it};
  for (++it; it != end; ++it) {
    box.min.x = std::min(box.min.x, it->x);
    box.min.y = std::min(box.min.y, it->y);
    box.max.x = std::max(box.max.x, it->x);
    box.max.y = std::max(box.max.y, it->y);
  }
  return box;
}

/// Shoelace area, positive for counter-clockwise rings in a y-up frame.
inline double signed_area(std::span<const Point2> ring) {
  double twice = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    twice += cross(ring[i], ring[(i + 1) % n]);
  }
  return 0.5 * twice;
}

/// Simple-or-not closed polygon with at least three vertices, no repeated
/// consecutive vertices, finite coordinates and nonzero signed area.
class Polygon {
 public:
  explicit Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
      throw Error(ErrorKind::kInvalidArgument,
                  "polygon needs at least 3 vertices, got " + std::to_string(vertices_.size()));
    }
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
      if (!is_finite(vertices_[i])) throw Error(ErrorKind::kInvalidArgument, "non-finite polygon vertex");
      if (vertices_[i] == vertices_[(i + 1) % n]) {
        throw Error(ErrorKind::kInvalidArgument, "repeated consecutive polygon vertex");
      }
    }
    if (packstruct::signed_area(vertices_) == 0.0) throw Error(ErrorKind::kInvalidArgument, "polygon has zero area");
  }

  /// Drops consecutive duplicates (cyclically) before validating.
  static Polygon from_ring(std::vector<Point2> ring) {
    std::vector<Point2> out;
    out.reserve(ring.size());
    for (const Point2& p : ring) {
      if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return Polygon(std::move(out));
  }

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }

  double signed_area() const { return packstruct::signed_area(vertices_); }
  double area() const { return std::abs(signed_area()); }

  double perimeter() const {
    double total = 0.0;
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
      total += distance(vertices_[i], vertices_[(i + 1) % n]);
    }
    return total;
  }

  Box bounds() const { return axis_aligned_bbox(vertices_); }

  template <typename F>
  Polygon transformed(F&& f) const {
    std::vector<Point2> out;
    out.reserve(vertices_.size());
    for (const Point2& p : vertices_) out.push_back(f(p));
    return Polygon::from_ring(std::move(out));
  }

  friend bool operator==(const Polygon&, const Polygon&) = default;

 private:
  std::vector<Point2> vertices_;
};

/// m x n occupancy grid. Cell (i, j) covers [i, i+1) x [j, j+1) in pixel
/// coordinates; i is the column (x), j the row (y, downward).
class BinaryRaster {
 public:
  BinaryRaster(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error(ErrorKind::kInvalidArgument, "raster dimensions must be >= 1");
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool at(int i, int j) const { return cells_[index(i, j)] != 0; }
  void set(int i, int j, bool value = true) { cells_[index(i, j)] = value ? 1 : 0; }

  /// Sets columns [first, last] of row j.
  void fill_row(int j, int first, int last) {
    if (first > last) return;
    std::fill(cells_.begin() + static_cast<std::ptrdiff_t>(index(first, j)),
              cells_.begin() + static_cast<std::ptrdiff_t>(index(last, j)) + 1, std::uint8_t{1});
  }

  std::span<const std::uint8_t> row(int j) const {
    return {cells_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(width_),
            static_cast<std::size_t>(width_)};
  }

  std::int64_t count() const {
    return std::count(cells_.begin(), cells_.end(), std::uint8_t{1});
  }
  bool empty() const { return std::find(cells_.begin(), cells_.end(), std::uint8_t{1}) == cells_.end(); }

  bool same_shape(const BinaryRaster& o) const { return width_ == o.width_ && height_ == o.height_; }

  BinaryRaster& operator&=(const BinaryRaster& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] &= o.cells_[k];
    return *this;
  }
  BinaryRaster& operator|=(const BinaryRaster& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < cells_.size(); ++k) cells_[k] |= o.cells_[k];
    return *this;
  }
  friend BinaryRaster operator&(BinaryRaster a, const BinaryRaster& b) { return a &= b; }
  friend BinaryRaster operator|(BinaryRaster a, const BinaryRaster& b) { return a |= b; }

  /// Mean of set cell centers; requires a nonempty raster.
  Point2 centroid() const {
    double sx = 0.0, sy = 0.0;
    std::int64_t n = 0;
    for (int j = 0; j < height_; ++j) {
      for (int i = 0; i < width_; ++i) {
        if (at(i, j)) {
          sx += i + 0.5;
          sy += j + 0.5;
          ++n;
        }
      }
    }
    if (n == 0) throw Error(ErrorKind::kEmptyMask, "centroid of an empty raster");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
  }

  friend bool operator==(const BinaryRaster&, const BinaryRaster&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(i);
  }
  void require_same_shape(const BinaryRaster& o) const {
    if (!same_shape(o)) throw Error(ErrorKind::kDimensionMismatch, "raster dimensions differ");
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

inline std::int64_t intersection_count(const BinaryRaster& a, const BinaryRaster& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::kDimensionMismatch, "raster dimensions differ");
  std::int64_t n = 0;
  for (int j = 0; j < a.height(); ++j) {
    const auto ra = a.row(j);
    const auto rb = b.row(j);
    for (std::size_t i = 0; i < ra.size(); ++i) n += ra[i] & rb[i];
  }
  return n;
}

/// |a ∩ b| / |a ∪ b|, or 0 when both are empty.
inline double iou(const BinaryRaster& a, const BinaryRaster& b) {
  const std::int64_t inter = intersection_count(a, b);
  const std::int64_t uni = a.count() + b.count() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

namespace detail {

/// Even-odd crossings of the horizontal line y = yc with the ring, sorted.
inline void scanline_crossings(std::span<const Point2> ring, double yc, std::vector<double>& out) {
  out.clear();
  for (std::size_t k = 0, n = ring.size(); k < n; ++k) {
    const Point2 a = ring[k];
    const Point2 b = ring[(k + 1) % n];
    if ((a.y > yc) != (b.y > yc)) {
      out.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
  }
  std::sort(out.begin(), out.end());
}

/// Visits the pixel spans of the ring row by row: f(row, first_col, last_col)
/// with columns already clipped to [0, width).
template <typename F>
void for_each_span(std::span<const Point2> ring, int width, int height, F&& f) {
  if (ring.size() < 3) return;
  const Box box = axis_aligned_bbox(ring);
  const int j0 = std::max(0, static_cast<int>(std::floor(box.min.y - 0.5)));
  const int j1 = std::min(height - 1, static_cast<int>(std::ceil(box.max.y)));
  std::vector<double> xs;
  for (int j = j0; j <= j1; ++j) {
    scanline_crossings(ring, j + 0.5, xs);
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel i is inside when xs[k] <= i + 0.5 < xs[k + 1].
      const double lo = std::ceil(xs[k] - 0.5);
      const double hi = std::ceil(xs[k + 1] - 0.5) - 1.0;
      const int first = static_cast<int>(std::max(lo, 0.0));
      const int last = static_cast<int>(std::min(hi, static_cast<double>(width - 1)));
      if (first <= last) f(j, first, last);
    }
  }
}

}  // namespace detail

struct Rasterization {
  BinaryRaster raster;
  bool degenerate = false;
};

/// Pixel-center even-odd rasterization of an arbitrary ring. A ring with
/// fewer than three vertices or zero area yields an empty raster flagged
/// degenerate.
inline Rasterization rasterize_ring(std::span<const Point2> ring, int width, int height) {
  Rasterization out{BinaryRaster(width, height), false};
  if (ring.size() < 3 || signed_area(ring) == 0.0) {
    out.degenerate = true;
    return out;
  }
  detail::for_each_span(ring, width, height,
                        [&](int j, int first, int last) { out.raster.fill_row(j, first, last); });
  return out;
}

inline BinaryRaster rasterize(const Polygon& poly, int width, int height) {
  return rasterize_ring(poly.vertices(), width, height).raster;
}

/// Douglas-Peucker simplification of an open polyline. Keeps the endpoints;
/// every dropped point lies within `epsilon` of the simplified chain.
inline std::vector<Point2> douglas_peucker(std::span<const Point2> polyline, double epsilon) {
  if (polyline.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "douglas_peucker needs at least 2 points");
  }
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "epsilon must be >= 0");

  const std::size_t n = polyline.size();
  std::vector<char> keep(n, 0);
  keep.front() = keep.back() = 1;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [first, last] = stack.back();
    stack.pop_back();
    if (last <= first + 1) continue;
    double worst = -1.0;
    std::size_t worst_at = first;
    for (std::size_t k = first + 1; k < last; ++k) {
      const double d = distance_to_segment(polyline[k], polyline[first], polyline[last]);
      if (d > worst) {
        worst = d;
        worst_at = k;
      }
    }
    if (worst > epsilon) {
      keep[worst_at] = 1;
      stack.emplace_back(first, worst_at);
      stack.emplace_back(worst_at, last);
    }
  }

  std::vector<Point2> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (keep[k]) out.push_back(polyline[k]);
  }
  return out;
}

/// Closed-ring variant: splits the ring at two far-apart anchor vertices and
/// simplifies both chains. Output preserves the ring's cyclic order.
inline std::vector<Point2> douglas_peucker_closed(std::span<const Point2> ring, double epsilon) {
  const std::size_t n = ring.size();
  if (n <= 3) return {ring.begin(), ring.end()};

  auto farthest_from = [&](Point2 p) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = distance(ring[k], p);
      if (d > best_d) {
        best_d = d;
        best = k;
      }
    }
    return best;
  };
  const std::size_t a = farthest_from(ring[0]);
  const std::size_t b = farthest_from(ring[a]);
  if (a == b) return {ring[a]};

  auto chain = [&](std::size_t from, std::size_t to) {
    std::vector<Point2> c;
    for (std::size_t k = from;; k = (k + 1) % n) {
      c.push_back(ring[k]);
      if (k == to) break;
    }
    return douglas_peucker(c, epsilon);
  };
  std::vector<Point2> out = chain(a, b);
  const std::vector<Point2> back = chain(b, a);
  out.pop_back();
  out.insert(out.end(), back.begin(), back.end() - 1);
  return out;
}

}  // namespace packstruct
