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

// Raster-to-polygon conversion: connected components and crack-following
// boundary tracing on the pixel-corner lattice.

#include <array>
#include <cstdint>
#include <vector>

#include "packstruct/geometry.hpp"

namespace packstruct {

/// Largest 4-connected component. Ties go to the component whose first
/// pixel comes first in row-major order. Empty input gives empty output.
inline BinaryRaster largest_component(const BinaryRaster& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::int32_t> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::vector<std::int64_t> sizes;
  std::vector<std::int32_t> queue;
  auto at = [w](int i, int j) { return static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i); };

  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!mask.at(i, j) || label[at(i, j)] >= 0) continue;
      const auto id = static_cast<std::int32_t>(sizes.size());
      std::int64_t size = 0;
      queue.assign(1, static_cast<std::int32_t>(at(i, j)));
      label[at(i, j)] = id;
      while (!queue.empty()) {
        const std::int32_t cell = queue.back();
        queue.pop_back();
        ++size;
        const int ci = cell % w;
        const int cj = cell / w;
        const std::array<std::array<int, 2>, 4> nbrs{{{ci - 1, cj}, {ci + 1, cj}, {ci, cj - 1}, {ci, cj + 1}}};
        for (const auto& [ni, nj] : nbrs) {
          if (ni < 0 || nj < 0 || ni >= w || nj >= h) continue;
          if (!mask.at(ni, nj) || label[at(ni, nj)] >= 0) continue;
          label[at(ni, nj)] = id;
          queue.push_back(static_cast<std::int32_t>(at(ni, nj)));
        }
      }
      sizes.push_back(size);
    }
  }

  BinaryRaster out(w, h);
  if (sizes.empty()) return out;
  std::int32_t best = 0;
  for (std::int32_t k = 1; k < static_cast<std::int32_t>(sizes.size()); ++k) {
    if (sizes[k] > sizes[best]) best = k;
  }
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (label[at(i, j)] == best) out.set(i, j);
    }
  }
  return out;
}

/// Outer boundary of the 4-connected component containing the first set
/// pixel (row-major), as a polygon through pixel corners with collinear
/// vertices removed. Rasterizing the result reproduces the component with
/// its holes filled.
inline Polygon trace_outer_boundary(const BinaryRaster& mask) {
  const int w = mask.width();
  const int h = mask.height();
  int i0 = -1, j0 = -1;
  for (int j = 0; j < h && i0 < 0; ++j) {
    for (int i = 0; i < w; ++i) {
      if (mask.at(i, j)) {
        i0 = i;
        j0 = j;
        break;
      }
    }
  }
  if (i0 < 0) throw Error(ErrorKind::kEmptyMask, "cannot trace the boundary of an empty mask");

  auto in = [&](int i, int j) { return i >= 0 && j >= 0 && i < w && j < h && mask.at(i, j); };
  // A directed crack edge leaving corner (x, y) along (dx, dy) is a boundary
  // edge when the pixel on its right (screen frame, y down) is set and the
  // pixel on its left is not.
  auto is_edge = [&](int x, int y, int dx, int dy) {
    if (dx == 1) return in(x, y) && !in(x, y - 1);
    if (dx == -1) return in(x - 1, y - 1) && !in(x - 1, y);
    if (dy == 1) return in(x - 1, y) && !in(x, y);
    return in(x, y - 1) && !in(x - 1, y - 1);
  };

  std::vector<Point2> corners;
  int x = i0, y = j0, dx = 1, dy = 0;
  const std::int64_t guard = 4 * static_cast<std::int64_t>(w) * h + 8;
  for (std::int64_t steps = 0; steps < guard; ++steps) {
    x += dx;
    y += dy;
    // Right turn first keeps diagonal-only neighbours apart (4-connectivity).
    const std::array<std::array<int, 2>, 3> options{{{-dy, dx}, {dx, dy}, {dy, -dx}}};
    int ndx = 0, ndy = 0;
    for (const auto& [ox, oy] : options) {
      if (is_edge(x, y, ox, oy)) {
        ndx = ox;
        ndy = oy;
        break;
      }
    }
    if (ndx != dx || ndy != dy) corners.push_back({static_cast<double>(x), static_cast<double>(y)});
    if (x == i0 && y == j0 && ndx == 1 && ndy == 0) return Polygon::from_ring(std::move(corners));
    dx = ndx;
    dy = ndy;
  }
  throw Error(ErrorKind::kInvalidArgument, "boundary trace did not close");
}

}  // namespace packstruct
