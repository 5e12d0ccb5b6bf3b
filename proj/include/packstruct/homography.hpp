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

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

#include "packstruct/tetragon.hpp"

namespace packstruct {

/// Extent of a rectified side, in the same units as the source image.
struct RectSize {
  double s_h = 0.0;
  double s_v = 0.0;

  RectSize() = default;
  RectSize(double horizontal, double vertical) : s_h(horizontal), s_v(vertical) {
    if (!(s_h > 0.0) || !(s_v > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "rectified extents must be positive");
    }
  }
};

/// Mean top/bottom edge length by mean left/right edge length.
inline RectSize rect_size_for(const Tetragon& t) {
  return {0.5 * (t.top_length() + t.bottom_length()), 0.5 * (t.left_length() + t.right_length())};
}

/// Invertible planar projective map, scaled so the bottom-right entry is 1
/// whenever it is nonzero.
class Homography {
 public:
  Homography() : m_(Eigen::Matrix3d::Identity()) {}

  explicit Homography(const Eigen::Matrix3d& m) : m_(m) {
    if (std::abs(m_(2, 2)) > 1e-15) m_ /= m_(2, 2);
    if (!m_.allFinite() || std::abs(m_.determinant()) <= 1e-12) {
      throw Error(ErrorKind::kDegenerateQuad, "homography is not invertible");
    }
  }

  static Homography translation(double tx, double ty) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 2) = tx;
    m(1, 2) = ty;
    return Homography(m);
  }

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  Homography inverse() const { return Homography(m_.inverse()); }

  /// Composition: (a * b)(p) == a(b(p)).
  friend Homography operator*(const Homography& a, const Homography& b) { return Homography(a.m_ * b.m_); }

 private:
  Eigen::Matrix3d m_;
};

/// Projective transform with perspective divide; AtInfinity when the
/// homogeneous scale vanishes.
inline Point2 apply_homography(const Homography& h, Point2 p) {
  const Eigen::Matrix3d& m = h.matrix();
  const double w = m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2);
  if (std::abs(w) < 1e-12) throw Error(ErrorKind::kAtInfinity, "point maps to infinity");
  return {(m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2)) / w, (m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2)) / w};
}

namespace detail {

// Closed-form map of the unit square (0,0),(1,0),(1,1),(0,1) onto q[0..3].
inline Eigen::Matrix3d square_to_quad(const Quad& q) {
  const double sx = q[0].x - q[1].x + q[2].x - q[3].x;
  const double sy = q[0].y - q[1].y + q[2].y - q[3].y;
  Eigen::Matrix3d m;
  if (sx == 0.0 && sy == 0.0) {
    m << q[1].x - q[0].x, q[3].x - q[0].x, q[0].x,
         q[1].y - q[0].y, q[3].y - q[0].y, q[0].y,
         0.0, 0.0, 1.0;
    return m;
  }
  const double dx1 = q[1].x - q[2].x, dx2 = q[3].x - q[2].x;
  const double dy1 = q[1].y - q[2].y, dy2 = q[3].y - q[2].y;
  const double den = dx1 * dy2 - dx2 * dy1;
  if (den == 0.0) throw Error(ErrorKind::kDegenerateQuad, "quadrilateral has collinear corners");
  const double g = (sx * dy2 - dx2 * sy) / den;
  const double h = (dx1 * sy - sx * dy1) / den;
  m << q[1].x - q[0].x + g * q[1].x, q[3].x - q[0].x + h * q[3].x, q[0].x,
       q[1].y - q[0].y + g * q[1].y, q[3].y - q[0].y + h * q[3].y, q[0].y,
       g, h, 1.0;
  return m;
}

}  // namespace detail

/// Minimum corner angle below which a quad is rejected as DegenerateQuad.
inline constexpr double kMinCornerAngle = 5.0 * std::numbers::pi / 180.0;

inline void require_well_shaped(const Quad& q) {
  for (int k = 0; k < 4; ++k) {
    const Point2 a = q[k], b = q[(k + 1) % 4], c = q[(k + 2) % 4];
    const double scale = std::max(norm(b - a), norm(c - a));
    if (scale == 0.0 || std::abs(cross(b - a, c - a)) <= 1e-12 * scale * scale) {
      throw Error(ErrorKind::kDegenerateQuad, "quadrilateral has collinear corners");
    }
  }
  if (min_corner_angle(q) < kMinCornerAngle) {
    throw Error(ErrorKind::kDegenerateQuad, "quadrilateral corner angle below 5 degrees");
  }
}

/// Exact 4-point map between two quads given in corresponding order.
inline Homography homography_between(const Quad& src, const Quad& dst) {
  require_well_shaped(src);
  require_well_shaped(dst);
  const Eigen::Matrix3d from_src = detail::square_to_quad(src);
  const Eigen::Matrix3d to_dst = detail::square_to_quad(dst);
  return Homography(to_dst * from_src.inverse());
}

/// Maps the tetragon's TL, TR, BR, BL corners to (0,0), (s_h,0), (s_h,s_v),
/// (0,s_v).
inline Homography homography_from_corners(const Tetragon& src, RectSize dst) {
  const Quad target{Point2{0.0, 0.0}, Point2{dst.s_h, 0.0}, Point2{dst.s_h, dst.s_v}, Point2{0.0, dst.s_v}};
  return homography_between(src.corners(), target);
}

}  // namespace packstruct
