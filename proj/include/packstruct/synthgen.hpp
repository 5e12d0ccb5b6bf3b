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

// Synthetic transport-unit scenes seen through an ideal pinhole camera,
// emitted as detection documents with matching annotations.
//
// World frame: z up, ground plane z = 0, meters. A unit's local frame has
// its origin at the pallet footprint center, x along the pallet length and
// y along its width; `yaw` rotates local into world about z. The package
// stack is centered on the pallet. The stack face with outward normal -y
// holds n_h_left columns of width w and the face with normal +x holds
// n_h_right columns of width d; the camera must see both, with the former
// on the image left.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "packstruct/detections.hpp"
#include "packstruct/homography.hpp"

namespace packstruct {

struct Dims3 {
  double x = 0.0;  // width (w) / pallet length
  double y = 0.0;  // height (h) / pallet width
  double z = 0.0;  // depth (d) / pallet height
};

struct UnitSpec {
  int n_h_left = 1;
  int n_h_right = 1;
  int n_v = 1;
  Dims3 package_dims{0.4, 0.3, 0.3};  // (w, h, d)
  Category package_category = Category::kPkgKlt;
  Category pallet_category = Category::kPalletWood;
  Dims3 pallet_dims{1.2, 0.8, 0.144};  // (length, width, height)
  double lid_occlusion_frac = 0.0;
  /// When set, the lid rim hides the same band of the side face as of the
  /// top package row; otherwise the side mask keeps its full height.
  bool lid_crops_side = true;
  Point2 position{0.0, 0.0};
  double yaw = 0.0;  // radians

  CountTriple counts() const { return {n_h_left, n_h_right, n_v}; }
};

struct CameraSpec {
  Eigen::Vector3d position{0.0, -4.5, 2.2};
  Eigen::Vector3d look_at{0.0, 0.0, 0.5};
  double focal_px = 1400.0;
  int width = 1600;
  int height = 1200;
};

struct NoiseSpec {
  double vertex_jitter_px = 0.0;
  double dropout_prob = 0.0;
  double spurious_rate = 0.0;
  /// Confidences are resampled uniformly in mean +- spread (clamped to
  /// [0, 1]) only when a model is given.
  std::optional<std::pair<double, double>> confidence_model;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(vertex_jitter_px >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "vertex_jitter_px must be >= 0");
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "dropout_prob must lie in [0, 1]");
    }
    if (!(spurious_rate >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "spurious_rate must be >= 0");
    if (confidence_model && !(confidence_model->second >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "confidence spread must be >= 0");
    }
  }
};

struct Scene {
  ImageDetections detections;
  ImageAnnotations annotations;
};

namespace synth {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kFitSlack = 1e-6;

/// Pinhole camera with world-vertical up vector; image y points down.
class PinholeCamera {
 public:
  explicit PinholeCamera(const CameraSpec& spec) : spec_(spec) {
    if (!(spec.focal_px > 0.0) || spec.width < 1 || spec.height < 1) {
      throw Error(ErrorKind::kGenerationError, "camera needs positive focal length and image size");
    }
    forward_ = spec.look_at - spec.position;
    if (forward_.norm() == 0.0) throw Error(ErrorKind::kGenerationError, "camera look_at equals its position");
    forward_.normalize();
    right_ = forward_.cross(Eigen::Vector3d::UnitZ());
    if (right_.norm() < 1e-9) throw Error(ErrorKind::kGenerationError, "camera looks straight up or down");
    right_.normalize();
    down_ = forward_.cross(right_);
  }

  /// Projects a world point; nullopt when behind the camera.
  std::optional<Point2> project(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d v = p - spec_.position;
    const double z = v.dot(forward_);
    if (z < 1e-3) return std::nullopt;
    return Point2{0.5 * spec_.width + spec_.focal_px * v.dot(right_) / z,
                  0.5 * spec_.height + spec_.focal_px * v.dot(down_) / z};
  }

  const CameraSpec& spec() const { return spec_; }

 private:
  CameraSpec spec_;
  Eigen::Vector3d forward_, right_, down_;
};

inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Separating-axis overlap test for convex polygons (touching counts as
/// disjoint).
inline bool convex_overlap(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  auto separated_by_edges_of = [](const std::vector<Point2>& p, const std::vector<Point2>& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point2 e = p[(i + 1) % p.size()] - p[i];
      const Point2 n{-e.y, e.x};
      double pmin = INFINITY, pmax = -INFINITY, qmin = INFINITY, qmax = -INFINITY;
      for (const Point2& v : p) pmin = std::min(pmin, dot(n, v)), pmax = std::max(pmax, dot(n, v));
      for (const Point2& v : q) qmin = std::min(qmin, dot(n, v)), qmax = std::max(qmax, dot(n, v));
      if (pmax <= qmin || qmax <= pmin) return true;
    }
    return false;
  };
  return !separated_by_edges_of(a, b) && !separated_by_edges_of(b, a);
}

inline std::string unit_label(std::size_t k) { return "unit " + std::to_string(k); }

struct UnitGeometry {
  Eigen::Matrix3d rot;
  Eigen::Vector3d offset;
  double L, D, z0, stack_top;

  Eigen::Vector3d world(double x, double y, double z) const { return rot * Eigen::Vector3d(x, y, z) + offset; }
};

inline UnitGeometry unit_geometry(const UnitSpec& u) {
  UnitGeometry g;
  g.rot = Eigen::AngleAxisd(u.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  g.offset = Eigen::Vector3d(u.position.x, u.position.y, 0.0);
  g.L = u.n_h_left * u.package_dims.x;
  g.D = u.n_h_right * u.package_dims.z;
  g.z0 = u.pallet_dims.z;
  g.stack_top = g.z0 + u.n_v * u.package_dims.y;
  return g;
}

inline void validate_unit(const UnitSpec& u, std::size_t k) {
  const std::string who = unit_label(k);
  if (u.n_h_left < 1 || u.n_h_right < 1 || u.n_v < 1) {
    throw Error(ErrorKind::kGenerationError, who + ": grid counts must be >= 1");
  }
  if (!(u.package_dims.x > 0 && u.package_dims.y > 0 && u.package_dims.z > 0)) {
    throw Error(ErrorKind::kGenerationError, who + ": package dimensions must be positive");
  }
  if (!(u.pallet_dims.x > 0 && u.pallet_dims.y > 0 && u.pallet_dims.z > 0)) {
    throw Error(ErrorKind::kGenerationError, who + ": pallet dimensions must be positive");
  }
  if (!is_package(u.package_category)) throw Error(ErrorKind::kGenerationError, who + ": not a package category");
  if (!is_pallet(u.pallet_category)) throw Error(ErrorKind::kGenerationError, who + ": not a pallet category");
  if (!(u.lid_occlusion_frac >= 0.0 && u.lid_occlusion_frac <= 0.4)) {
    throw Error(ErrorKind::kGenerationError, who + ": lid_occlusion_frac must lie in [0, 0.4]");
  }
  if (u.n_h_left * u.package_dims.x > u.pallet_dims.x + kFitSlack ||
      u.n_h_right * u.package_dims.z > u.pallet_dims.y + kFitSlack) {
    throw Error(ErrorKind::kGenerationError, who + ": package grid exceeds the pallet footprint");
  }
}

/// Angle of the camera's ground-plane direction, seen from the unit center,
/// away from the normal of the left stack face, towards the right face.
inline double viewpoint_angle(const UnitSpec& u, const CameraSpec& cam) {
  const Eigen::Vector2d rel(cam.position.x() - u.position.x, cam.position.y() - u.position.y);
  const Eigen::Vector2d local = Eigen::Rotation2Dd(-u.yaw) * rel;
  return std::atan2(local.x(), -local.y());
}

inline std::vector<Point2> ground_footprint(const UnitSpec& u) {
  const UnitGeometry g = unit_geometry(u);
  const double a = 0.5 * u.pallet_dims.x, b = 0.5 * u.pallet_dims.y;
  std::vector<Point2> out;
  for (const auto& [x, y] : {std::pair{-a, -b}, std::pair{a, -b}, std::pair{a, b}, std::pair{-a, b}}) {
    const Eigen::Vector3d w = g.world(x, y, 0.0);
    out.push_back({w.x(), w.y()});
  }
  return out;
}

}  // namespace synth

/// Renders noise-free detections and annotations. Throws GenerationError
/// for invalid units, units outside the image or not showing two faces, and
/// units that overlap on the ground or occlude each other in the image.
inline Scene generate_scene(const std::vector<UnitSpec>& units, const CameraSpec& cam, const std::string& image_id) {
  using namespace synth;
  const PinholeCamera camera(cam);
  Scene scene{{ImageInfo{image_id, cam.width, cam.height}, {}}, {ImageInfo{image_id, cam.width, cam.height}, {}}};
  std::vector<std::vector<Point2>> silhouettes;

  for (std::size_t k = 0; k < units.size(); ++k) {
    const UnitSpec& u = units[k];
    const std::string who = unit_label(k);
    validate_unit(u, k);
    const UnitGeometry g = unit_geometry(u);

    const Eigen::Vector2d rel = Eigen::Rotation2Dd(-u.yaw) *
                                Eigen::Vector2d(cam.position.x() - u.position.x, cam.position.y() - u.position.y);
    const double alpha = viewpoint_angle(u, cam);
    if (!(rel.x() > 0.5 * g.L && rel.y() < -0.5 * g.D && alpha > 5 * kDeg && alpha < 85 * kDeg)) {
      throw Error(ErrorKind::kGenerationError, who + ": camera does not see both stack faces at a yaw in (5, 85) deg");
    }

    auto project = [&](double x, double y, double z) {
      const Eigen::Vector3d w = g.world(x, y, z);
      const auto p = camera.project(w);
      if (!p || p->x < 0.0 || p->y < 0.0 || p->x > cam.width || p->y > cam.height) {
        throw Error(ErrorKind::kGenerationError, who + " is not completely inside the image");
      }
      return *p;
    };
    auto record = [&](std::string id, Category c, std::vector<Point2> ring) {
      Polygon poly = Polygon::from_ring(std::move(ring));
      const Box b = poly.bounds();
      scene.detections.records.push_back({std::move(id), c, 1.0, b, std::move(poly)});
    };

    const std::string prefix = "u" + std::to_string(k);
    const double pa = 0.5 * u.pallet_dims.x, pb = 0.5 * u.pallet_dims.y;
    const double hl = 0.5 * g.L, hd = 0.5 * g.D;
    std::vector<Point2> pallet_pts, unit_pts;
    for (const double z : {0.0, g.z0}) {
      for (const auto& [x, y] : {std::pair{-pa, -pb}, std::pair{pa, -pb}, std::pair{pa, pb}, std::pair{-pa, pb}}) {
        pallet_pts.push_back(project(x, y, z));
      }
    }
    unit_pts = pallet_pts;
    for (const double z : {g.z0, g.stack_top}) {
      for (const auto& [x, y] : {std::pair{-hl, -hd}, std::pair{hl, -hd}, std::pair{hl, hd}, std::pair{-hl, hd}}) {
        unit_pts.push_back(project(x, y, z));
      }
    }
    std::vector<Point2> silhouette = convex_hull(unit_pts);
    for (std::size_t other = 0; other < silhouettes.size(); ++other) {
      if (convex_overlap(ground_footprint(units[other]), ground_footprint(u))) {
        throw Error(ErrorKind::kGenerationError, "units " + std::to_string(other) + " and " + std::to_string(k) +
                                                     " overlap on the ground plane");
      }
      if (convex_overlap(silhouettes[other], silhouette)) {
        throw Error(ErrorKind::kGenerationError, "units " + std::to_string(other) + " and " + std::to_string(k) +
                                                     " occlude each other in the image");
      }
    }
    record(prefix, Category::kTransportUnit, silhouette);
    scene.annotations.units.push_back(
        {Polygon::from_ring(silhouette), u.pallet_category, u.package_category, u.counts()});
    silhouettes.push_back(std::move(silhouette));
    record(prefix + "-pallet", u.pallet_category, convex_hull(pallet_pts));

    const double h = u.package_dims.y;
    const double face_top = g.z0 + (u.n_v - u.lid_occlusion_frac) * h;
    const double side_top = u.lid_crops_side ? face_top : g.stack_top;
    // Left face runs along +x at y = -D/2; right face along +y at x = +L/2.
    auto left_face = [&](double a0, double a1, double z0, double z1) {
      return std::vector<Point2>{project(-hl + a0, -hd, z1), project(-hl + a1, -hd, z1), project(-hl + a1, -hd, z0),
                                 project(-hl + a0, -hd, z0)};
    };
    auto right_face = [&](double a0, double a1, double z0, double z1) {
      return std::vector<Point2>{project(hl, -hd + a0, z1), project(hl, -hd + a1, z1), project(hl, -hd + a1, z0),
                                 project(hl, -hd + a0, z0)};
    };
    const std::array<std::vector<Point2>, 2> side_faces{left_face(0.0, g.L, g.z0, side_top),
                                                       right_face(0.0, g.D, g.z0, side_top)};
    for (int side = 0; side < 2; ++side) {
      const std::vector<Point2>& f = side_faces[static_cast<std::size_t>(side)];
      // The recognizer refuses sides this thin, so the truth would be unrecoverable.
      if (min_corner_angle(Quad{f[0], f[1], f[2], f[3]}) < kMinCornerAngle) {
        throw Error(ErrorKind::kGenerationError,
                    who + ": side " + std::to_string(side) + " projects to a sliver with a corner below 5 deg");
      }
      record(prefix + "-side-" + std::to_string(side), Category::kTuSide, f);
    }
    for (int row = 0; row < u.n_v; ++row) {
      const double z0 = g.z0 + row * h;
      const double z1 = row == u.n_v - 1 ? face_top : z0 + h;
      const std::string r = "-r" + std::to_string(row);
      for (int c = 0; c < u.n_h_left; ++c) {
        const double w = u.package_dims.x;
        record(prefix + "-pkg-0" + r + "-c" + std::to_string(c), u.package_category, left_face(c * w, (c + 1) * w, z0, z1));
      }
      for (int c = 0; c < u.n_h_right; ++c) {
        const double d = u.package_dims.z;
        record(prefix + "-pkg-1" + r + "-c" + std::to_string(c), u.package_category, right_face(c * d, (c + 1) * d, z0, z1));
      }
    }
  }
  return scene;
}

/// Applies mask-level noise. Transport-unit records are never dropped;
/// spurious small package records are appended.
inline ImageDetections perturb(const ImageDetections& dets, const NoiseSpec& noise) {
  noise.validate();
  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double W = dets.image.width, H = dets.image.height;

  auto confidence = [&](double current) {
    if (!noise.confidence_model) return current;
    const auto [mean, spread] = *noise.confidence_model;
    return std::clamp(mean + spread * (2.0 * unit(rng) - 1.0), 0.0, 1.0);
  };

  ImageDetections out{dets.image, {}};
  for (const DetectionRecord& r : dets.records) {
    if (r.category != Category::kTransportUnit && noise.dropout_prob > 0.0 && unit(rng) < noise.dropout_prob) continue;
    DetectionRecord copy = r;
    if (noise.vertex_jitter_px > 0.0) {
      std::vector<Point2> ring;
      for (const Point2& p : r.mask.vertices()) {
        const double j = noise.vertex_jitter_px;
        ring.push_back({std::clamp(p.x + j * (2.0 * unit(rng) - 1.0), 0.0, W),
                        std::clamp(p.y + j * (2.0 * unit(rng) - 1.0), 0.0, H)});
      }
      try {
        copy.mask = Polygon::from_ring(std::move(ring));
        copy.bbox = copy.mask.bounds();
      } catch (const Error&) {
        // Jitter collapsed the polygon; keep the clean record.
      }
      if (!(copy.bbox.width() > 0.0 && copy.bbox.height() > 0.0)) copy = r;
    }
    copy.confidence = confidence(r.confidence);
    out.records.push_back(std::move(copy));
  }

  if (noise.spurious_rate > 0.0) {
    std::poisson_distribution<int> count(noise.spurious_rate);
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      const double size = 10.0 + 20.0 * unit(rng);
      const double x = unit(rng) * std::max(0.0, W - size), y = unit(rng) * std::max(0.0, H - size);
      const double sx = std::min(size, W), sy = std::min(size, H);
      Polygon poly({{x, y}, {x + sx, y}, {x + sx, y + sy}, {x, y + sy}});
      const Box b = poly.bounds();
      out.records.push_back({"spurious-" + std::to_string(k), unit(rng) < 0.5 ? Category::kPkgKlt : Category::kPkgTray,
                             confidence(1.0), b, std::move(poly)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random scenes

/// Ranges for random scenes. Units stand in a row facing a single camera.
struct SamplerSpec {
  int min_units = 1;
  int max_units = 1;
  int max_n_h = 6;
  int max_n_v = 4;
  double min_yaw_deg = 10.0;
  double max_yaw_deg = 80.0;
  std::vector<double> lid_occlusion{0.0, 0.3};
  /// Total stack height; package height is this divided by n_v.
  double min_stack_height = 0.6;
  double max_stack_height = 1.2;
  double spacing = 2.2;  // meters between unit centers
  int width = 2400;
  int height = 1800;
  double focal_px = 2100.0;

  void validate() const {
    if (min_units < 1 || max_units < min_units) throw Error(ErrorKind::kInvalidArgument, "bad unit count range");
    if (max_n_h < 1 || max_n_v < 1) throw Error(ErrorKind::kInvalidArgument, "grid limits must be >= 1");
    if (!(min_yaw_deg > 5.0 && max_yaw_deg < 85.0 && min_yaw_deg <= max_yaw_deg)) {
      throw Error(ErrorKind::kInvalidArgument, "yaw range must lie inside (5, 85) deg");
    }
    if (lid_occlusion.empty()) throw Error(ErrorKind::kInvalidArgument, "lid_occlusion needs at least one value");
    if (!(min_stack_height > 0.0 && max_stack_height >= min_stack_height)) {
      throw Error(ErrorKind::kInvalidArgument, "bad stack height range");
    }
  }
};

struct SceneSpec {
  std::vector<UnitSpec> units;
  CameraSpec camera;
};

/// Draws a scene that satisfies every generator precondition. The camera
/// backs off until all units fit in the image.
inline SceneSpec sample_scene(const SamplerSpec& s, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  // A draw whose units cannot all be shown at any distance is redrawn.
  for (int draw = 0; draw < 20; ++draw) {
    const int n = integer(s.min_units, s.max_units);
    std::vector<UnitSpec> units(static_cast<std::size_t>(n));
    std::vector<double> alphas;
    for (UnitSpec& u : units) {
      u.n_h_left = integer(1, s.max_n_h);
      u.n_h_right = integer(1, s.max_n_h);
      u.n_v = integer(1, s.max_n_v);
      u.package_dims = {u.pallet_dims.x / u.n_h_left * uniform(0.8, 1.0),
                        uniform(s.min_stack_height, s.max_stack_height) / u.n_v,
                        u.pallet_dims.y / u.n_h_right * uniform(0.8, 1.0)};
      u.package_category = integer(0, 1) == 0 ? Category::kPkgKlt : Category::kPkgTray;
      u.pallet_category = integer(0, 1) == 0 ? Category::kPalletWood : Category::kPalletPlastic;
      const int lid = integer(0, static_cast<int>(s.lid_occlusion.size()) - 1);
      u.lid_occlusion_frac = s.lid_occlusion[static_cast<std::size_t>(lid)];
      alphas.push_back(uniform(s.min_yaw_deg, s.max_yaw_deg) * synth::kDeg);
    }
    const double row_width = (n - 1) * s.spacing;
    for (int k = 0; k < n; ++k) units[static_cast<std::size_t>(k)].position = {k * s.spacing - 0.5 * row_width, 0.0};

    double distance = 3.5 + 0.8 * row_width;
    for (int attempt = 0; attempt < 40; ++attempt, distance *= 1.1) {
      SceneSpec spec;
      spec.camera.position = {0.0, -distance, 0.3 * distance};
      spec.camera.look_at = {0.0, 0.0, 0.5};
      spec.camera.focal_px = s.focal_px;
      spec.camera.width = s.width;
      spec.camera.height = s.height;
      spec.units = units;
      for (std::size_t k = 0; k < units.size(); ++k) {
        UnitSpec& u = spec.units[k];
        const double beta =
            std::atan2(spec.camera.position.y() - u.position.y, spec.camera.position.x() - u.position.x);
        u.yaw = beta - alphas[k] + 0.5 * std::numbers::pi;
      }
      try {
        generate_scene(spec.units, spec.camera, "probe");
        return spec;
      } catch (const Error&) {
        // Back off and try again.
      }
    }
  }
  throw Error(ErrorKind::kGenerationError, "could not place the sampled units inside the image");
}

}  // namespace packstruct
