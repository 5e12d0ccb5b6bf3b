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

// File-level commands behind the packstruct tool. Argument parsing and
// logging backends live in the tool; everything here is testable in-process.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "packstruct/evaluation.hpp"
#include "packstruct/results.hpp"
#include "packstruct/svg.hpp"
#include "packstruct/synthgen.hpp"

namespace packstruct::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitParse = 2, kExitPairing = 3, kExitInternal = 4 };

/// A failure that ends a command with a specific exit code.
class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

enum class LogLevel { kDebug, kInfo, kWarn, kError };
using Logger = std::function<void(LogLevel, const std::string&)>;

struct Io {
  std::ostream& out;  // summary lines and tables
  Logger log = [](LogLevel, const std::string&) {};
};

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  PipelineConfig pipeline;
  EvalConfig eval;
  std::string out = ".";
  std::uint64_t seed = 0;

  void validate() const {
    pipeline.validate();
    eval.validate();
  }
};

inline Json to_json(const RunConfig& c) {
  const FilterConfig& f = c.pipeline.filter;
  return {{"delta1", c.pipeline.delta1},
          {"delta2", c.pipeline.delta2},
          {"raster_scale", c.pipeline.raster_scale},
          {"min_confidence_tu", f.min_confidence_tu},
          {"min_confidence_intra", f.min_confidence_intra},
          {"min_size_frac", f.min_size_frac},
          {"suppression_iou", f.suppression_iou},
          {"containment_frac", f.containment_frac},
          {"min_side_area_frac", f.min_side_area_frac},
          {"iou_threshold", c.eval.iou_threshold},
          {"strict_pallet", c.eval.strict_pallet},
          {"out", c.out},
          {"seed", c.seed}};
}

/// Flat JSON object with RunConfig field names; unknown keys are rejected.
/// Keys not present keep the values already in `base`.
inline RunConfig parse_run_config(std::string_view document, RunConfig base = {}) {
  const Json root = detail::parse_document(document);
  if (!root.is_object()) detail::fail("config", "expected an object", -1);
  FilterConfig& f = base.pipeline.filter;
  for (const auto& [key, value] : root.items()) {
    auto number = [&, &key = key, &value = value]() {
      if (!value.is_number()) detail::fail("config." + key, "expected a number", -1);
      return value.get<double>();
    };
    if (key == "delta1") base.pipeline.delta1 = number();
    else if (key == "delta2") base.pipeline.delta2 = number();
    else if (key == "min_confidence_tu") f.min_confidence_tu = number();
    else if (key == "min_confidence_intra") f.min_confidence_intra = number();
    else if (key == "min_size_frac") f.min_size_frac = number();
    else if (key == "suppression_iou") f.suppression_iou = number();
    else if (key == "containment_frac") f.containment_frac = number();
    else if (key == "min_side_area_frac") f.min_side_area_frac = number();
    else if (key == "iou_threshold") base.eval.iou_threshold = number();
    else if (key == "raster_scale") {
      if (!value.is_number_integer()) detail::fail("config.raster_scale", "expected an integer", -1);
      base.pipeline.raster_scale = value.get<int>();
    } else if (key == "strict_pallet") {
      if (!value.is_boolean()) detail::fail("config.strict_pallet", "expected true or false", -1);
      base.eval.strict_pallet = value.get<bool>();
    } else if (key == "out") {
      if (!value.is_string()) detail::fail("config.out", "expected a string", -1);
      base.out = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) detail::fail("config.seed", "expected a non-negative integer", -1);
      base.seed = value.get<std::uint64_t>();
    } else {
      detail::fail("config", "unknown key '" + key + "'", -1);
    }
  }
  return base;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(kExitParse, path.string() + ": cannot read file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Writes through a temporary file in the target directory, then renames.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Failure(kExitInternal, tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

/// scene_3_det.json -> scene_3_res.json; other names get "_res" appended.
inline std::string result_file_name(const fs::path& input) {
  std::string stem = input.stem().string();
  if (stem.size() > 4 && stem.ends_with("_det")) stem.resize(stem.size() - 4);
  return stem + "_res.json";
}

/// Sorted *.json files of a directory ending in `suffix`; when none match,
/// every *.json file.
inline std::vector<fs::path> list_documents(const fs::path& dir, std::string_view suffix) {
  if (!fs::is_directory(dir)) throw Failure(kExitParse, dir.string() + ": not a directory");
  std::vector<fs::path> matching, all;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    all.push_back(e.path());
    if (e.path().filename().string().ends_with(suffix)) matching.push_back(e.path());
  }
  std::vector<fs::path>& out = matching.empty() ? all : matching;
  std::sort(out.begin(), out.end());
  return out;
}

template <typename F>
auto parse_file(const fs::path& path, F parse) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw Failure(kExitParse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scene specs

namespace spec {

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) detail::fail(where, "expected an object", -1);
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) detail::fail(where, "unknown key '" + key + "'", -1);
  }
}

inline std::vector<double> numbers(const Json& v, const std::string& where, std::size_t n) {
  if (!v.is_array() || (n > 0 && v.size() != n)) {
    detail::fail(where, n > 0 ? "expected " + std::to_string(n) + " numbers" : "expected an array of numbers", -1);
  }
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) detail::fail(where, "expected numbers", -1);
    out.push_back(x.get<double>());
  }
  return out;
}

inline double number(const Json& obj, const char* key, const std::string& where, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) detail::fail(where + "." + key, "expected a number", -1);
  return it->get<double>();
}

inline int integer(const Json& obj, const char* key, const std::string& where, int fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) detail::fail(where + "." + key, "expected an integer", -1);
  return it->get<int>();
}

inline UnitSpec parse_unit(const Json& j, const std::string& where) {
  check_keys(j, where,
             {"n_h_left", "n_h_right", "n_v", "package_dims", "package_category", "pallet_category", "pallet_dims",
              "lid_occlusion_frac", "lid_crops_side", "position", "yaw"});
  UnitSpec u;
  u.n_h_left = detail::require_int(j, "n_h_left", where, -1);
  u.n_h_right = detail::require_int(j, "n_h_right", where, -1);
  u.n_v = detail::require_int(j, "n_v", where, -1);
  if (j.contains("package_dims")) {
    const auto d = numbers(j["package_dims"], where + ".package_dims", 3);
    u.package_dims = {d[0], d[1], d[2]};
  }
  if (j.contains("pallet_dims")) {
    const auto d = numbers(j["pallet_dims"], where + ".pallet_dims", 3);
    u.pallet_dims = {d[0], d[1], d[2]};
  }
  if (j.contains("package_category")) u.package_category = detail::require_category(j, "package_category", where, -1);
  if (j.contains("pallet_category")) u.pallet_category = detail::require_category(j, "pallet_category", where, -1);
  u.lid_occlusion_frac = number(j, "lid_occlusion_frac", where, u.lid_occlusion_frac);
  if (j.contains("lid_crops_side")) {
    if (!j["lid_crops_side"].is_boolean()) detail::fail(where + ".lid_crops_side", "expected true or false", -1);
    u.lid_crops_side = j["lid_crops_side"].get<bool>();
  }
  if (j.contains("position")) {
    const auto p = numbers(j["position"], where + ".position", 2);
    u.position = {p[0], p[1]};
  }
  u.yaw = number(j, "yaw", where, u.yaw);
  return u;
}

inline CameraSpec parse_camera(const Json& j) {
  check_keys(j, "camera", {"position", "look_at", "focal_px", "width", "height"});
  CameraSpec c;
  if (j.contains("position")) {
    const auto p = numbers(j["position"], "camera.position", 3);
    c.position = {p[0], p[1], p[2]};
  }
  if (j.contains("look_at")) {
    const auto p = numbers(j["look_at"], "camera.look_at", 3);
    c.look_at = {p[0], p[1], p[2]};
  }
  c.focal_px = number(j, "focal_px", "camera", c.focal_px);
  c.width = integer(j, "width", "camera", c.width);
  c.height = integer(j, "height", "camera", c.height);
  return c;
}

inline NoiseSpec parse_noise(const Json& j) {
  check_keys(j, "noise", {"vertex_jitter_px", "dropout_prob", "spurious_rate", "confidence_model", "seed"});
  NoiseSpec n;
  n.vertex_jitter_px = number(j, "vertex_jitter_px", "noise", n.vertex_jitter_px);
  n.dropout_prob = number(j, "dropout_prob", "noise", n.dropout_prob);
  n.spurious_rate = number(j, "spurious_rate", "noise", n.spurious_rate);
  if (j.contains("confidence_model")) {
    const auto m = numbers(j["confidence_model"], "noise.confidence_model", 2);
    n.confidence_model = std::pair{m[0], m[1]};
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) detail::fail("noise.seed", "expected a non-negative integer", -1);
    n.seed = j["seed"].get<std::uint64_t>();
  }
  return n;
}

inline SamplerSpec parse_sampler(const Json& j) {
  check_keys(j, "sampler",
             {"min_units", "max_units", "max_n_h", "max_n_v", "min_yaw_deg", "max_yaw_deg", "lid_occlusion",
              "min_stack_height", "max_stack_height", "spacing", "width", "height", "focal_px"});
  SamplerSpec s;
  s.min_units = integer(j, "min_units", "sampler", s.min_units);
  s.max_units = integer(j, "max_units", "sampler", s.max_units);
  s.max_n_h = integer(j, "max_n_h", "sampler", s.max_n_h);
  s.max_n_v = integer(j, "max_n_v", "sampler", s.max_n_v);
  s.min_yaw_deg = number(j, "min_yaw_deg", "sampler", s.min_yaw_deg);
  s.max_yaw_deg = number(j, "max_yaw_deg", "sampler", s.max_yaw_deg);
  if (j.contains("lid_occlusion")) s.lid_occlusion = numbers(j["lid_occlusion"], "sampler.lid_occlusion", 0);
  s.min_stack_height = number(j, "min_stack_height", "sampler", s.min_stack_height);
  s.max_stack_height = number(j, "max_stack_height", "sampler", s.max_stack_height);
  s.spacing = number(j, "spacing", "sampler", s.spacing);
  s.width = integer(j, "width", "sampler", s.width);
  s.height = integer(j, "height", "sampler", s.height);
  s.focal_px = number(j, "focal_px", "sampler", s.focal_px);
  return s;
}

}  // namespace spec

/// Either fixed units seen by one camera, or a sampler drawing a new scene
/// per index. Noise is optional in both cases.
struct GenerateSpec {
  std::vector<UnitSpec> units;
  CameraSpec camera;
  std::optional<SamplerSpec> sampler;
  std::optional<NoiseSpec> noise;
};

inline GenerateSpec parse_generate_spec(std::string_view document) {
  const Json root = detail::parse_document(document);
  spec::check_keys(root, "scene spec", {"units", "camera", "noise", "sampler"});
  GenerateSpec g;
  if (root.contains("sampler")) {
    if (root.contains("units") || root.contains("camera")) {
      detail::fail("scene spec", "'sampler' replaces 'units' and 'camera'; give one or the other", -1);
    }
    g.sampler = spec::parse_sampler(root["sampler"]);
  } else {
    const Json& units = detail::require(root, "units", "scene spec", -1);
    if (!units.is_array() || units.empty()) detail::fail("units", "expected a non-empty array", -1);
    for (std::size_t k = 0; k < units.size(); ++k) {
      g.units.push_back(spec::parse_unit(units[k], "units[" + std::to_string(k) + "]"));
    }
    if (root.contains("camera")) g.camera = spec::parse_camera(root["camera"]);
  }
  if (root.contains("noise")) g.noise = spec::parse_noise(root["noise"]);
  return g;
}

// ---------------------------------------------------------------------------
// Commands

namespace internal {

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Maps library failures onto exit codes.
template <typename F>
int guarded(Io& io, F body) {
  try {
    return body();
  } catch (const Failure& e) {
    io.log(LogLevel::kError, e.what());
    return e.code();
  } catch (const ParseError& e) {
    io.log(LogLevel::kError, e.what());
    return kExitParse;
  } catch (const Error& e) {
    io.log(LogLevel::kError, e.what());
    if (e.kind() == ErrorKind::kPairingError) return kExitPairing;
    if (e.kind() == ErrorKind::kInvalidArgument || e.kind() == ErrorKind::kGenerationError) return kExitParse;
    return kExitInternal;
  } catch (const std::exception& e) {
    io.log(LogLevel::kError, std::string("internal error: ") + e.what());
    return kExitInternal;
  }
}

}  // namespace internal

/// One result document per detection file, written to cfg.out. Unit-level
/// failures are reported in the documents and do not fail the command.
inline int cmd_recognize(const std::vector<fs::path>& inputs, const RunConfig& cfg, Io& io) {
  return internal::guarded(io, [&] {
    cfg.validate();
    int status = kExitOk;
    for (const fs::path& path : inputs) {
      const int file_status = internal::guarded(io, [&] {
        const ImageDetections dets = parse_file(path, [](const std::string& t) { return parse_image_detections(t); });
        const ImageResult result = recognize_image(dets, cfg.pipeline);
        const ResultDocument doc = to_result_document(result);
        const fs::path target = fs::path(cfg.out) / result_file_name(path);
        write_file_atomic(target, internal::dump(to_json(doc)));
        std::size_t ok = 0;
        for (const UnitOutcome& u : result.units) {
          if (u.ok()) {
            ++ok;
            io.log(LogLevel::kDebug, dets.image.id + "/" + u.unit_id + ": total " + std::to_string(u.structure->total));
          } else {
            io.log(LogLevel::kWarn, dets.image.id + "/" + u.unit_id + ": " + u.error->what());
          }
        }
        io.out << dets.image.id << ": " << result.units.size() << " units, " << ok << " ok, "
               << result.units.size() - ok << " failed -> " << target.string() << "\n";
        return static_cast<int>(kExitOk);
      });
      status = std::max(status, file_status);
    }
    return status;
  });
}

/// Writes scene_<k>_det.json and scene_<k>_ann.json for k in [0, count).
inline int cmd_generate(const fs::path& spec_path, int count, const RunConfig& cfg, Io& io) {
  return internal::guarded(io, [&] {
    if (count < 0) throw Failure(kExitParse, "count must be >= 0");
    const GenerateSpec g = parse_file(spec_path, [](const std::string& t) { return parse_generate_spec(t); });
    std::mt19937_64 seeds(cfg.seed);
    int status = kExitOk;
    for (int k = 0; k < count; ++k) {
      const std::uint64_t scene_seed = seeds(), noise_seed = seeds();
      const std::string id = "scene_" + std::to_string(k);
      try {
        std::vector<UnitSpec> units = g.units;
        CameraSpec camera = g.camera;
        if (g.sampler) {
          SceneSpec drawn = sample_scene(*g.sampler, scene_seed);
          units = std::move(drawn.units);
          camera = drawn.camera;
        }
        Scene scene = generate_scene(units, camera, id);
        if (g.noise) {
          NoiseSpec noise = *g.noise;
          noise.seed ^= noise_seed;
          scene.detections = perturb(scene.detections, noise);
        }
        write_file_atomic(fs::path(cfg.out) / (id + "_det.json"), internal::dump(to_json(scene.detections)));
        write_file_atomic(fs::path(cfg.out) / (id + "_ann.json"), internal::dump(to_json(scene.annotations)));
        io.out << id << ": " << units.size() << " units\n";
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kGenerationError) throw;
        io.log(LogLevel::kError, id + ": " + e.what());
        status = kExitParse;
      }
    }
    return status;
  });
}

/// Pairs annotation and result documents by image id, writes report.json
/// and report.txt to cfg.out and prints the table.
inline int cmd_evaluate(const fs::path& annotations_dir, const fs::path& results_dir, const RunConfig& cfg, Io& io) {
  return internal::guarded(io, [&] {
    cfg.validate();
    std::vector<ImageAnnotations> anns;
    for (const fs::path& p : list_documents(annotations_dir, "_ann.json")) {
      anns.push_back(parse_file(p, [](const std::string& t) { return parse_annotations(t); }));
    }
    std::vector<ResultDocument> results;
    for (const fs::path& p : list_documents(results_dir, "_res.json")) {
      results.push_back(parse_file(p, [](const std::string& t) { return parse_result_document(t); }));
    }
    const EvalReport report = evaluate_dataset(anns, results, cfg.eval);
    const std::string table = render_table(report);
    write_file_atomic(fs::path(cfg.out) / "report.json", internal::dump(to_json(report)));
    write_file_atomic(fs::path(cfg.out) / "report.txt", table);
    io.out << table;
    return static_cast<int>(kExitOk);
  });
}

inline int cmd_visualize(const fs::path& detections, const fs::path& result, const fs::path& out_path, Io& io) {
  return internal::guarded(io, [&] {
    const ImageDetections dets = parse_file(detections, [](const std::string& t) { return parse_image_detections(t); });
    const ResultDocument doc = parse_file(result, [](const std::string& t) { return parse_result_document(t); });
    write_file_atomic(out_path, render_svg(dets.image, doc));
    io.out << dets.image.id << " -> " << out_path.string() << "\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace packstruct::cli
