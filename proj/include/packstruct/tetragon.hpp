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
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "packstruct/contour.hpp"
#include "packstruct/geometry.hpp"

namespace packstruct {

using Quad = std::array<Point2, 4>;

namespace detail {

inline int orientation_sign(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation_sign(a, b, c);
  const int o2 = orientation_sign(a, b, d);
  const int o3 = orientation_sign(c, d, a);
  const int o4 = orientation_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace detail

/// True when the corners, taken in the given cyclic order, bound a simple
/// quadrilateral of nonzero area.
inline bool is_simple_quad(const Quad& q) {
  if (signed_area(q) == 0.0) return false;
  for (int k = 0; k < 4; ++k) {
    if (q[k] == q[(k + 1) % 4]) return false;
  }
  return !detail::segments_intersect(q[0], q[1], q[2], q[3]) &&
         !detail::segments_intersect(q[1], q[2], q[3], q[0]);
}

/// Smallest unsigned angle (radians) between the two edges meeting at any corner.
inline double min_corner_angle(const Quad& q) {
  double best = std::numbers::pi;
  for (int k = 0; k < 4; ++k) {
    const Point2 u = q[(k + 3) % 4] - q[k];
    const Point2 v = q[(k + 1) % 4] - q[k];
    best = std::min(best, std::abs(std::atan2(cross(u, v), dot(u, v))));
  }
  return best;
}

/// Orders four corners as top-left, top-right, bottom-right, bottom-left.
///
/// Corners are first put in clockwise screen order (angle about their mean).
/// Of the two pairs of opposite edges, the pair closer to vertical forms the
/// left/right sides; the top side is the other pair's edge with the smaller
/// mean y. For upright quads this agrees with "two smallest y are the top,
/// smaller x is left", and it stays correct for wide sides whose top edge
/// drops more than the side is tall. The result depends only on the corner
/// set, so it is idempotent and permutation-invariant.
inline Quad canonical_corner_order(const Quad& corners) {
  Point2 mean{};
  for (const Point2& p : corners) mean = mean + 0.25 * p;
  Quad q = corners;
  std::sort(q.begin(), q.end(), [&](Point2 a, Point2 b) {
    const double ta = std::atan2(a.y - mean.y, a.x - mean.x);
    const double tb = std::atan2(b.y - mean.y, b.x - mean.x);
    if (ta != tb) return ta < tb;
    return distance(a, mean) < distance(b, mean);
  });

  auto slant = [&](int k) {
    const Point2 e = q[(k + 1) % 4] - q[k];
    const double len = norm(e);
    return len > 0.0 ? std::abs(e.x) / len : 1.0;
  };
  // Edges k and k+2 are opposite; the more vertical pair is left/right.
  const int horizontal_pair = (slant(0) + slant(2) >= slant(1) + slant(3)) ? 0 : 1;
  auto mean_y = [&](int k) { return 0.5 * (q[k].y + q[(k + 1) % 4].y); };
  const int top = mean_y(horizontal_pair) <= mean_y(horizontal_pair + 2) ? horizontal_pair
                                                                          : horizontal_pair + 2;
  Quad out;
  for (int k = 0; k < 4; ++k) out[k] = q[(top + k) % 4];
  return out;
}

/// Simple quadrilateral with positive area in canonical corner order.
class Tetragon {
 public:
  enum Corner { kTopLeft = 0, kTopRight = 1, kBottomRight = 2, kBottomLeft = 3 };

  /// Canonicalizes `corners`; throws DegenerateQuad when the ordered corners
  /// do not bound a simple quadrilateral.
  explicit Tetragon(const Quad& corners) : corners_(canonical_corner_order(corners)) {
    for (const Point2& p : corners_) {
      if (!is_finite(p)) throw Error(ErrorKind::kInvalidArgument, "non-finite tetragon corner");
    }
    if (!is_simple_quad(corners_)) {
      throw Error(ErrorKind::kDegenerateQuad, "corners do not form a simple quadrilateral");
    }
  }

  const Quad& corners() const noexcept { return corners_; }
  const Point2& operator[](int k) const { return corners_[static_cast<std::size_t>(k)]; }
  double area() const { return std::abs(signed_area(corners_)); }
  Polygon polygon() const { return Polygon({corners_.begin(), corners_.end()}); }

  double top_length() const { return distance(corners_[kTopLeft], corners_[kTopRight]); }
  double bottom_length() const { return distance(corners_[kBottomLeft], corners_[kBottomRight]); }
  double left_length() const { return distance(corners_[kTopLeft], corners_[kBottomLeft]); }
  double right_length() const { return distance(corners_[kTopRight], corners_[kBottomRight]); }

  friend bool operator==(const Tetragon&, const Tetragon&) = default;

 private:
  Quad corners_;
};

/// Reduces a polygon to its four extreme corners by binary-searching the
/// closed Douglas-Peucker tolerance over [0.5, bbox diagonal] (40 steps) for
/// the smallest value that leaves at most four vertices. Anything other than
/// exactly four at that tolerance is NotQuadrilateral, as is a fourth vertex
/// that sits within twice the tolerance of the chord between its neighbours
/// (a staircase bump on a rasterized triangle edge, not a corner).
inline Tetragon simplify_to_tetragon(const Polygon& poly) {
  const std::vector<Point2>& ring = poly.vertices();
  const Box box = poly.bounds();
  const double diagonal = std::hypot(box.width(), box.height());
  // Douglas-Peucker on a closed ring may split at an arbitrary point of an
  // edge parallel to the anchor chord; such vertices sit within eps of their
  // neighbours' chord and are pruned, least prominent first.
  auto simplified = [&](double eps) {
    std::vector<Point2> v = douglas_peucker_closed(ring, eps);
    while (v.size() > 3) {
      std::size_t weakest = 0;
      double lowest = INFINITY;
      for (std::size_t k = 0, n = v.size(); k < n; ++k) {
        const double d = distance_to_segment(v[k], v[(k + n - 1) % n], v[(k + 1) % n]);
        if (d < lowest) {
          lowest = d;
          weakest = k;
        }
      }
      if (lowest > eps) break;
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(weakest));
    }
    return v;
  };

  double lo = 0.5;
  double hi = std::max(diagonal, lo);
  std::vector<Point2> best = simplified(lo);
  if (best.size() <= 4) {
    hi = lo;
  } else {
    if (simplified(hi).size() > 4) {
      throw Error(ErrorKind::kNotQuadrilateral, "polygon does not reduce to four vertices");
    }
    for (int iter = 0; iter < 40; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (simplified(mid).size() <= 4) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    best = simplified(hi);
  }
  if (best.size() != 4) {
    throw Error(ErrorKind::kNotQuadrilateral,
                "polygon simplifies to " + std::to_string(best.size()) + " vertices, not 4");
  }
  const Quad q{best[0], best[1], best[2], best[3]};
  for (int k = 0; k < 4; ++k) {
    if (distance_to_segment(q[k], q[(k + 3) % 4], q[(k + 1) % 4]) <= 2.0 * hi) {
      throw Error(ErrorKind::kNotQuadrilateral, "polygon has only three prominent corners");
    }
  }
  if (!is_simple_quad(q)) {
    throw Error(ErrorKind::kNotQuadrilateral, "simplified polygon is not a simple quadrilateral");
  }
  return Tetragon(q);
}

/// Symmetric-difference pixel count between a fixed mask and candidate
/// quadrilaterals. Row prefix sums make each evaluation cost O(rows spanned).
class RegionDifference {
 public:
  explicit RegionDifference(const BinaryRaster& mask)
      : width_(mask.width()),
        height_(mask.height()),
        prefix_(static_cast<std::size_t>(mask.height()) * static_cast<std::size_t>(mask.width() + 1), 0) {
    for (int j = 0; j < height_; ++j) {
      const auto row = mask.row(j);
      std::int32_t* p = row_prefix(j);
      for (int i = 0; i < width_; ++i) p[i + 1] = p[i] + row[static_cast<std::size_t>(i)];
      mask_count_ += p[width_];
    }
  }

  std::int64_t mask_count() const noexcept { return mask_count_; }

  /// |mask| + |quad| - 2 |mask ∩ quad|, with the quad rasterized by the
  /// pixel-center even-odd rule inside the mask frame.
  std::int64_t operator()(std::span<const Point2> ring) const {
    std::int64_t inside = 0;
    std::int64_t overlap = 0;
    detail::for_each_span(ring, width_, height_, [&](int j, int first, int last) {
      const std::int32_t* p = row_prefix(j);
      inside += last - first + 1;
      overlap += p[last + 1] - p[first];
    });
    return mask_count_ + inside - 2 * overlap;
  }

 private:
  std::int32_t* row_prefix(int j) { return prefix_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(width_ + 1); }
  const std::int32_t* row_prefix(int j) const {
    return prefix_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(width_ + 1);
  }

  int width_;
  int height_;
  std::vector<std::int32_t> prefix_;
  std::int64_t mask_count_ = 0;
};

/// Number of pixels where `mask` and the rasterized tetragon disagree.
inline std::int64_t tetragon_objective(const BinaryRaster& mask, const Tetragon& t) {
  return RegionDifference(mask)(t.corners());
}

struct TetragonFit {
  Tetragon tetragon;
  Tetragon seed;
  std::int64_t objective = 0;
  std::int64_t seed_objective = 0;
  int sweeps = 0;
};

struct PatternSearchOptions {
  double initial_step = 8.0;
  double final_step = 0.5;
  int max_sweeps_per_step = 200;
  /// Besides the eight single-coordinate moves, also try moving a corner
  /// diagonally or along its incident edges, and shifting a whole edge along
  /// its normal. Thin, slanted masks otherwise stall in valleys that no
  /// single coordinate can descend.
  bool extended_pattern = true;
};

namespace detail {

inline Point2 unit_vector(Point2 v) {
  const double n = norm(v);
  return n > 0.0 ? (1.0 / n) * v : Point2{0, 0};
}

}  // namespace detail

/// Locally minimizes the region difference starting from `seed` by
/// coordinate-wise pattern search over the eight corner coordinates (plus
/// the extended pattern when enabled). A move is taken only if it strictly
/// lowers the objective and keeps the corners a simple quadrilateral, so the
/// result never scores worse than the seed.
inline TetragonFit refine_tetragon(const BinaryRaster& mask, const Tetragon& seed,
                                   const PatternSearchOptions& opts = {}) {
  const RegionDifference objective(mask);
  Quad current = seed.corners();
  std::int64_t best = objective(current);
  const std::int64_t seed_value = best;
  int sweeps = 0;

  // Repeats one move while it keeps improving; returns whether it did.
  auto descend = [&](auto&& apply) {
    bool moved = false;
    for (;;) {
      Quad cand = current;
      apply(cand);
      if (!is_simple_quad(cand)) break;
      const std::int64_t value = objective(cand);
      if (value >= best) break;
      best = value;
      current = cand;
      moved = true;
    }
    return moved;
  };

  for (double step = opts.initial_step; step >= opts.final_step; step *= 0.5) {
    for (int sweep = 0; sweep < opts.max_sweeps_per_step; ++sweep) {
      ++sweeps;
      bool improved = false;
      for (int corner = 0; corner < 4; ++corner) {
        for (const Point2 dir : {Point2{1, 0}, Point2{-1, 0}, Point2{0, 1}, Point2{0, -1}}) {
          improved |= descend([&](Quad& q) { q[corner] = q[corner] + step * dir; });
        }
      }
      if (opts.extended_pattern) {
        for (int corner = 0; corner < 4; ++corner) {
          const Point2 to_next = detail::unit_vector(current[(corner + 1) % 4] - current[corner]);
          const Point2 to_prev = detail::unit_vector(current[(corner + 3) % 4] - current[corner]);
          for (const Point2 dir : {Point2{1, 1}, Point2{-1, -1}, Point2{1, -1}, Point2{-1, 1}, to_next, -1.0 * to_next,
                                   to_prev, -1.0 * to_prev}) {
            improved |= descend([&](Quad& q) { q[corner] = q[corner] + step * dir; });
          }
        }
        for (int edge = 0; edge < 4; ++edge) {
          const Point2 along = detail::unit_vector(current[(edge + 1) % 4] - current[edge]);
          const Point2 normal{-along.y, along.x};
          for (const double sign : {1.0, -1.0}) {
            improved |= descend([&](Quad& q) {
              q[edge] = q[edge] + (sign * step) * normal;
              q[(edge + 1) % 4] = q[(edge + 1) % 4] + (sign * step) * normal;
            });
          }
        }
      }
      if (!improved) break;
    }
  }
  return TetragonFit{Tetragon(current), seed, best, seed_value, sweeps};
}

/// Seeds from the largest connected component's traced boundary, then
/// refines. Throws EmptyMask for an empty mask and propagates
/// NotQuadrilateral from seeding.
inline TetragonFit fit_tetragon_detailed(const BinaryRaster& mask, const PatternSearchOptions& opts = {}) {
  if (mask.empty()) throw Error(ErrorKind::kEmptyMask, "cannot fit a tetragon to an empty mask");
  const Polygon boundary = trace_outer_boundary(largest_component(mask));
  return refine_tetragon(mask, simplify_to_tetragon(boundary), opts);
}

inline Tetragon fit_tetragon(const BinaryRaster& mask) { return fit_tetragon_detailed(mask).tetragon; }

}  // namespace packstruct
