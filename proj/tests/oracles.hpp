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

// Independent reference implementations used only by the test suites.
// Nothing here calls into the library code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "packstruct/geometry.hpp"

namespace packstruct::oracle {

/// Per-point crossing-number test (W. R. Franklin's pnpoly).
inline bool inside_even_odd(const std::vector<Point2>& ring, double px, double py) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point2 a = ring[i], b = ring[j];
    if ((a.y > py) != (b.y > py)) {
      const double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
      if (px < x) inside = !inside;
    }
  }
  return inside;
}

/// Tests every pixel center of the w x h raster individually.
inline std::vector<std::vector<bool>> brute_force_cells(const std::vector<Point2>& ring, int w, int h) {
  std::vector<std::vector<bool>> cells(static_cast<std::size_t>(h), std::vector<bool>(static_cast<std::size_t>(w)));
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) cells[j][i] = inside_even_odd(ring, i + 0.5, j + 0.5);
  }
  return cells;
}

inline std::int64_t brute_force_count(const std::vector<Point2>& ring, int w, int h) {
  std::int64_t n = 0;
  for (const auto& row : brute_force_cells(ring, w, h)) n += std::count(row.begin(), row.end(), true);
  return n;
}

/// Symmetric difference between a raster and a ring tested pixel by pixel.
inline std::int64_t brute_force_region_difference(const BinaryRaster& mask, const std::vector<Point2>& ring) {
  std::int64_t n = 0;
  for (int j = 0; j < mask.height(); ++j) {
    for (int i = 0; i < mask.width(); ++i) {
      n += mask.at(i, j) != inside_even_odd(ring, i + 0.5, j + 0.5);
    }
  }
  return n;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

/// Largest distance from any input point to the simplified chain.
inline double max_deviation(const std::vector<Point2>& input, const std::vector<Point2>& chain) {
  double worst = 0.0;
  for (const Point2& p : input) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      best = std::min(best, point_segment_distance(p, chain[k], chain[k + 1]));
    }
    if (chain.size() == 1) best = std::hypot(p.x - chain[0].x, p.y - chain[0].y);
    worst = std::max(worst, best);
  }
  return worst;
}

inline bool is_subsequence(const std::vector<Point2>& sub, const std::vector<Point2>& seq) {
  std::size_t k = 0;
  for (const Point2& p : seq) {
    if (k < sub.size() && sub[k] == p) ++k;
  }
  return k == sub.size();
}

/// Random star-shaped polygon around (cx, cy) with radii in [rmin, rmax].
inline std::vector<Point2> random_star_polygon(std::mt19937_64& rng, double cx, double cy, double rmin,
                                               double rmax, int min_vertices = 3, int max_vertices = 12) {
  std::uniform_int_distribution<int> count(min_vertices, max_vertices);
  std::uniform_real_distribution<double> radius(rmin, rmax);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = count(rng);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& a : angles) a = unit(rng) * 2.0 * 3.14159265358979323846;
  std::sort(angles.begin(), angles.end());
  std::vector<Point2> ring;
  for (double a : angles) {
    const double r = radius(rng);
    ring.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return ring;
}

/// e_i = 1 - tp / (tp + fp + fn) reduced to lowest terms in integers, then
/// rounded to double exactly once.
inline double image_error_from_counts(int tp, int fp, int fn) {
  const int denom = tp + fp + fn;
  if (denom == 0) return 0.0;
  const int num = denom - tp;
  const int g = std::gcd(num, denom);
  return static_cast<double>(num / g) / static_cast<double>(denom / g);
}

/// Count formula floor(extent / ps + 0.5 + delta) written independently.
inline int count_by_formula(double extent, double ps, double delta) {
  return static_cast<int>(std::floor(extent / ps + 0.5 + delta));
}

/// Exhaustive maximum one-to-one matching over an IoU matrix: maximizes the
/// number of pairs at or above the threshold, then their IoU sum.
struct BestMatching {
  int pairs = 0;
  double iou_sum = 0.0;
};

inline BestMatching exhaustive_matching(const std::vector<std::vector<double>>& iou, double threshold) {
  const int n_gt = static_cast<int>(iou.size());
  const int n_pred = n_gt > 0 ? static_cast<int>(iou[0].size()) : 0;
  BestMatching best;
  std::vector<int> used(static_cast<std::size_t>(n_pred), 0);
  std::vector<double> picked;
  std::function<void(int)> rec = [&](int g) {
    if (g == n_gt) {
      std::vector<double> sorted = picked;
      std::sort(sorted.begin(), sorted.end());
      const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
      const int pairs = static_cast<int>(picked.size());
      if (pairs > best.pairs || (pairs == best.pairs && sum > best.iou_sum + 1e-12)) best = {pairs, sum};
      return;
    }
    rec(g + 1);
    for (int p = 0; p < n_pred; ++p) {
      if (used[p] || iou[g][p] < threshold) continue;
      used[p] = 1;
      picked.push_back(iou[g][p]);
      rec(g + 1);
      picked.pop_back();
      used[p] = 0;
    }
  };
  rec(0);
  return best;
}

}  // namespace packstruct::oracle
