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
#include <gtest/gtest.h>

#include <random>

#include "packstruct/homography.hpp"

namespace packstruct {
namespace {

constexpr double kTol = 1e-9;

void expect_near(Point2 a, Point2 b, double tol = kTol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
}

TEST(HomographyTest, AxisAlignedRectangleGivesIdentity) {
  const Tetragon src(Quad{Point2{0, 0}, Point2{4, 0}, Point2{4, 3}, Point2{0, 3}});
  const Homography h = homography_from_corners(src, RectSize(4, 3));
  EXPECT_TRUE(h.matrix().isApprox(Eigen::Matrix3d::Identity(), 1e-12));
}

TEST(HomographyTest, CornersMapExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> jitter(-40, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const Tetragon src(Quad{Point2{100 + jitter(rng), 100 + jitter(rng)}, Point2{900 + jitter(rng), 150 + jitter(rng)},
                            Point2{880 + jitter(rng), 700 + jitter(rng)}, Point2{120 + jitter(rng), 650 + jitter(rng)}});
    const RectSize rect = rect_size_for(src);
    const Homography h = homography_from_corners(src, rect);
    expect_near(apply_homography(h, src[Tetragon::kTopLeft]), {0, 0});
    expect_near(apply_homography(h, src[Tetragon::kTopRight]), {rect.s_h, 0});
    expect_near(apply_homography(h, src[Tetragon::kBottomRight]), {rect.s_h, rect.s_v});
    expect_near(apply_homography(h, src[Tetragon::kBottomLeft]), {0, rect.s_v});
  }
}

TEST(HomographyTest, TrapezoidRoundTrip) {
  const Quad square{Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}};
  const Quad trapezoid{Point2{0.2, 0}, Point2{0.8, 0}, Point2{1, 1}, Point2{0, 1}};
  const Homography h = homography_between(square, trapezoid);
  const Homography back = h.inverse();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const Point2 p{u(rng), u(rng)};
    expect_near(apply_homography(back, apply_homography(h, p)), p);
    expect_near(apply_homography(h * back, p), p);
  }
}

TEST(HomographyTest, IdentityAndTranslation) {
  const Homography id;
  expect_near(apply_homography(id, {3.5, -2}), {3.5, -2}, 0.0);
  expect_near(apply_homography(Homography::translation(5, -7), {1, 2}), {6, -5}, 0.0);
}

TEST(HomographyTest, DegenerateInputs) {
  const Quad collinear{Point2{0, 0}, Point2{1, 0}, Point2{2, 0}, Point2{0, 1}};
  const Quad unit{Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}};
  try {
    homography_between(collinear, unit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateQuad);
  }
  // Sliver with a 2 degree corner.
  const Tetragon sliver(Quad{Point2{0, 0}, Point2{100, 0}, Point2{100, 3.5}, Point2{50, 1.8}});
  EXPECT_THROW(homography_from_corners(sliver, RectSize(1, 1)), Error);
  EXPECT_THROW(RectSize(0, 1), Error);
}

TEST(HomographyTest, PointOnVanishingLineIsAtInfinity) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1.0;  // w = x + 1
  const Homography h(m);
  try {
    apply_homography(h, {-1.0, 4.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAtInfinity);
  }
}

}  // namespace
}  // namespace packstruct
