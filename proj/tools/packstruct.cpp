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

// packstruct: recognize, generate, evaluate and visualize packaging
// structures from segmentation documents.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "packstruct/cli.hpp"

namespace {

using namespace packstruct::cli;

std::shared_ptr<spdlog::logger> make_logger() {
  auto logger = spdlog::stderr_color_mt("packstruct");
  logger->set_pattern("%^%l%$: %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("PACKSTRUCT_LOG")) {
    const std::string level = env;
    if (level == "error") logger->set_level(spdlog::level::err);
    else if (level == "warn") logger->set_level(spdlog::level::warn);
    else if (level == "info") logger->set_level(spdlog::level::info);
    else if (level == "debug") logger->set_level(spdlog::level::debug);
    else logger->warn("PACKSTRUCT_LOG='{}' is not one of error|warn|info|debug; using warn", level);
  }
  return logger;
}

}  // namespace

int main(int argc, char** argv) {
  const auto logger = make_logger();
  Io io{std::cout, [&](LogLevel level, const std::string& msg) {
          switch (level) {
            case LogLevel::kDebug: logger->debug(msg); break;
            case LogLevel::kInfo: logger->info(msg); break;
            case LogLevel::kWarn: logger->warn(msg); break;
            case LogLevel::kError: logger->error(msg); break;
          }
        }};

  CLI::App app{"Packaging structure recognition for transport units"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> iou_threshold, delta1, delta2;
  bool strict_pallet = false;
  app.add_option("--config", config_path, "Flat JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory (default: current directory)");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--iou-threshold", iou_threshold, "Mask IoU threshold for matching");
  app.add_option("--delta1", delta1, "Horizontal count offset");
  app.add_option("--delta2", delta2, "Vertical count offset");
  app.add_flag("--strict-pallet", strict_pallet, "Require matching pallet categories");

  std::vector<std::string> detections;
  auto* recognize = app.add_subcommand("recognize", "Recognize packaging structures in detection files");
  recognize->add_option("detections", detections, "Detection documents");

  std::string scene_spec;
  int count = 1;
  auto* generate = app.add_subcommand("generate", "Generate synthetic detection and annotation files");
  generate->add_option("spec", scene_spec, "Scene spec JSON")->required();
  generate->add_option("--count", count, "Number of scenes")->check(CLI::NonNegativeNumber);

  std::string annotations_dir, results_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate result documents against annotations");
  evaluate->add_option("annotations", annotations_dir, "Annotation directory")->required();
  evaluate->add_option("results", results_dir, "Result directory")->required();

  std::string vis_detections, vis_result, vis_out;
  auto* visualize = app.add_subcommand("visualize", "Render an SVG overlay of a result document");
  visualize->add_option("detections", vis_detections, "Detection document")->required();
  visualize->add_option("result", vis_result, "Result document")->required();
  visualize->add_option("svg", vis_out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = parse_run_config(read_file(config_path));
    } catch (const std::exception& e) {
      logger->error("{}: {}", config_path, e.what());
      return kExitParse;
    }
  }
  if (!out_dir.empty()) cfg.out = out_dir;
  if (seed) cfg.seed = *seed;
  if (iou_threshold) cfg.eval.iou_threshold = *iou_threshold;
  if (delta1) cfg.pipeline.delta1 = *delta1;
  if (delta2) cfg.pipeline.delta2 = *delta2;
  if (strict_pallet) cfg.eval.strict_pallet = true;
  logger->debug("config: {}", to_json(cfg).dump());

  if (*recognize) {
    std::vector<fs::path> paths(detections.begin(), detections.end());
    return cmd_recognize(paths, cfg, io);
  }
  if (*generate) return cmd_generate(scene_spec, count, cfg, io);
  if (*evaluate) return cmd_evaluate(annotations_dir, results_dir, cfg, io);
  return cmd_visualize(vis_detections, vis_result, vis_out, io);
}
