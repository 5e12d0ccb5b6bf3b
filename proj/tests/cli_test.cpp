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
#include <unistd.h>

#include <sstream>

#include "packstruct/cli.hpp"

namespace packstruct::cli {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            ("packstruct_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write(const std::string& name, const std::string& content) {
    const fs::path p = root_ / name;
    write_file_atomic(p, content);
    return p;
  }

  RunConfig config(const std::string& out) {
    RunConfig c;
    c.out = (root_ / out).string();
    c.pipeline.filter.min_side_area_frac = 0.005;
    return c;
  }

  Io io() {
    return {out_, [this](LogLevel, const std::string& m) { log_ += m + "\n"; }};
  }

  std::vector<std::string> files(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(root_ / dir)) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  fs::path root_;
  std::ostringstream out_;
  std::string log_;
};

constexpr const char* kSampled = R"({"sampler": {"min_units": 1, "max_units": 3}})";

TEST_F(CliTest, RunConfigParsing) {
  const RunConfig c = parse_run_config(R"({"delta1": 0.1, "strict_pallet": true, "seed": 9, "raster_scale": 512})");
  EXPECT_EQ(c.pipeline.delta1, 0.1);
  EXPECT_EQ(c.pipeline.delta2, 0.15);
  EXPECT_TRUE(c.eval.strict_pallet);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.pipeline.raster_scale, 512);
  EXPECT_THROW(parse_run_config(R"({"delta3": 0.1})"), ParseError);
  EXPECT_THROW(parse_run_config(R"({"delta1": "x"})"), ParseError);
  EXPECT_THROW(parse_run_config(R"({"seed": -1})"), ParseError);
  EXPECT_THROW(parse_run_config("[]"), ParseError);

  const RunConfig back = parse_run_config(to_json(c).dump());
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const fs::path spec = write("spec.json", kSampled);
  RunConfig a = config("a"), b = config("b"), c = config("c");
  a.seed = b.seed = 5;
  c.seed = 6;
  Io out = io();
  ASSERT_EQ(cmd_generate(spec, 5, a, out), kExitOk);
  ASSERT_EQ(cmd_generate(spec, 5, b, out), kExitOk);
  ASSERT_EQ(cmd_generate(spec, 5, c, out), kExitOk);
  const std::vector<std::string> names = files("a");
  ASSERT_EQ(names.size(), 10u);
  EXPECT_EQ(names.front(), "scene_0_ann.json");
  EXPECT_EQ(names.back(), "scene_4_det.json");
  bool any_difference = false;
  for (const std::string& n : names) {
    EXPECT_EQ(read_file(root_ / "a" / n), read_file(root_ / "b" / n)) << n;
    any_difference |= read_file(root_ / "a" / n) != read_file(root_ / "c" / n);
  }
  EXPECT_TRUE(any_difference);
}

TEST_F(CliTest, GenerateReportsInvalidScenes) {
  const fs::path spec = write("spec.json", R"({"units": [
      {"n_h_left": 2, "n_h_right": 2, "n_v": 1, "package_dims": [0.6, 0.3, 0.4], "yaw": -0.5},
      {"n_h_left": 2, "n_h_right": 2, "n_v": 1, "package_dims": [0.6, 0.3, 0.4], "yaw": -0.5,
       "position": [0.4, 0.2]}]})");
  Io out = io();
  EXPECT_EQ(cmd_generate(spec, 1, config("g"), out), kExitParse);
  EXPECT_NE(log_.find("units 0 and 1 overlap"), std::string::npos) << log_;

  const fs::path unknown = write("unknown.json", R"({"units": [{"n_h_left": 1, "n_h_right": 1, "n_v": 1, "rows": 3}]})");
  EXPECT_EQ(cmd_generate(unknown, 1, config("g"), out), kExitParse);
  EXPECT_NE(log_.find("unknown key 'rows'"), std::string::npos) << log_;
}

TEST_F(CliTest, RecognizeWritesOneResultPerInput) {
  const fs::path spec = write("spec.json", R"({"units": [
      {"n_h_left": 3, "n_h_right": 2, "n_v": 2, "package_dims": [0.4, 0.3, 0.4], "yaw": -0.5}]})");
  Io out = io();
  ASSERT_EQ(cmd_generate(spec, 1, config("gen"), out), kExitOk);
  ASSERT_EQ(cmd_recognize({root_ / "gen" / "scene_0_det.json"}, config("res"), out), kExitOk);
  EXPECT_EQ(files("res"), (std::vector<std::string>{"scene_0_res.json"}));
  const ResultDocument doc = parse_result_document(read_file(root_ / "res" / "scene_0_res.json"));
  ASSERT_EQ(doc.units.size(), 1u);
  EXPECT_TRUE(doc.units[0].ok);
  EXPECT_EQ(doc.units[0].counts, (CountTriple{3, 2, 2}));
  EXPECT_NE(out_.str().find("scene_0: 1 units, 1 ok, 0 failed"), std::string::npos) << out_.str();
}

TEST_F(CliTest, RecognizeInputFailures) {
  Io out = io();
  const fs::path bad = write("bad.json", "{\"image\": ");
  EXPECT_EQ(cmd_recognize({bad}, config("res"), out), kExitParse);
  EXPECT_NE(log_.find("bad.json"), std::string::npos);
  EXPECT_EQ(cmd_recognize({root_ / "missing.json"}, config("res"), out), kExitParse);

  out_.str("");
  EXPECT_EQ(cmd_recognize({}, config("empty"), out), kExitOk);
  EXPECT_TRUE(out_.str().empty());
  EXPECT_FALSE(fs::exists(root_ / "empty"));

  RunConfig broken = config("res");
  broken.pipeline.delta1 = 0.7;
  EXPECT_EQ(cmd_recognize({bad}, broken, out), kExitParse);
}

TEST_F(CliTest, RecognizeThenEvaluateOracleCorpus) {
  const fs::path spec = write("spec.json", kSampled);
  Io out = io();
  RunConfig cfg = config("gen");
  cfg.seed = 12;
  ASSERT_EQ(cmd_generate(spec, 6, cfg, out), kExitOk);
  std::vector<fs::path> dets;
  for (int k = 0; k < 6; ++k) dets.push_back(root_ / "gen" / ("scene_" + std::to_string(k) + "_det.json"));
  ASSERT_EQ(cmd_recognize(dets, config("res"), out), kExitOk);
  out_.str("");
  ASSERT_EQ(cmd_evaluate(root_ / "gen", root_ / "res", config("eval"), out), kExitOk);
  const std::string table = out_.str();
  EXPECT_NE(table.find("1.0000     1.0000"), std::string::npos) << table;
  EXPECT_NE(table.find("all      6       0.0000"), std::string::npos) << table;
  EXPECT_EQ(read_file(root_ / "eval" / "report.txt"), table);
  const Json report = Json::parse(read_file(root_ / "eval" / "report.json"));
  EXPECT_EQ(report["mean_error"].get<double>(), 0.0);
}

TEST_F(CliTest, EvaluateTableTwoFixture) {
  // 175 one-unit images recognized correctly plus one extra detection.
  const std::string unit = R"({"polygon": [[10, 10], [40, 10], [40, 60], [10, 60]], "pallet_category": "pallet_wood",
                              "package_category": "pkg_klt", "counts": {"h_left": 2, "h_right": 3, "v": 1}})";
  auto result_unit = [](const std::string& id, int x0) {
    const std::string x1 = std::to_string(x0 + 30);
    return R"({"unit_id": ")" + id + R"(", "status": "ok", "n_h_left": 2, "n_h_right": 3, "n_v": 1, "total": 6,
              "package_category": "pkg_klt", "pallet_category": "pallet_wood",
              "unit_polygon": [[)" + std::to_string(x0) + ", 10], [" + x1 + ", 10], [" + x1 + ", 60], [" +
           std::to_string(x0) + ", 60]]}";
  };
  for (int k = 0; k < 175; ++k) {
    const std::string id = "img" + std::to_string(k);
    write("ann/" + id + "_ann.json",
          R"({"image": {"id": ")" + id + R"(", "width": 100, "height": 100}, "units": [)" + unit + "]}");
    std::string units = result_unit("u0", 10);
    if (k == 0) units += ", " + result_unit("u1", 60);
    write("res/" + id + "_res.json", R"({"image_id": ")" + id + R"(", "units": [)" + units + "]}");
  }
  Io out = io();
  ASSERT_EQ(cmd_evaluate(root_ / "ann", root_ / "res", config("eval"), out), kExitOk) << log_;
  EXPECT_NE(out_.str().find("175    1      0      0.9943     1.0000"), std::string::npos) << out_.str();

  fs::remove(root_ / "res" / "img7_res.json");
  EXPECT_EQ(cmd_evaluate(root_ / "ann", root_ / "res", config("eval"), out), kExitPairing);
  EXPECT_NE(log_.find("annotation-only:img7"), std::string::npos) << log_;
}

TEST_F(CliTest, VisualizeDrawsGridLines) {
  const fs::path spec = write("spec.json", R"({"units": [
      {"n_h_left": 3, "n_h_right": 4, "n_v": 2, "package_dims": [0.4, 0.3, 0.2], "yaw": -0.5}]})");
  Io out = io();
  ASSERT_EQ(cmd_generate(spec, 1, config("gen"), out), kExitOk);
  ASSERT_EQ(cmd_recognize({root_ / "gen" / "scene_0_det.json"}, config("res"), out), kExitOk);
  const fs::path svg = root_ / "vis" / "scene_0.svg";
  ASSERT_EQ(cmd_visualize(root_ / "gen" / "scene_0_det.json", root_ / "res" / "scene_0_res.json", svg, out), kExitOk);

  const ResultDocument doc = parse_result_document(read_file(root_ / "res" / "scene_0_res.json"));
  ASSERT_EQ(doc.units[0].sides.size(), 2u);
  const SideGrid left = side_grid(doc.units[0].sides[0]), right = side_grid(doc.units[0].sides[1]);
  EXPECT_EQ(left.vertical.size(), 2u);
  EXPECT_EQ(left.horizontal.size(), 1u);
  EXPECT_EQ(right.vertical.size(), 3u);
  EXPECT_EQ(right.horizontal.size(), 1u);

  const std::string text = read_file(svg);
  std::size_t lines = 0;
  for (std::size_t p = text.find("<line"); p != std::string::npos; p = text.find("<line", p + 1)) ++lines;
  EXPECT_EQ(lines, 7u);
  EXPECT_NE(text.find("3 × 4 × 2 = 24"), std::string::npos);
  EXPECT_EQ(text.find("<svg"), text.rfind("<svg"));
  EXPECT_NE(text.find("</svg>"), std::string::npos);

  // Mismatched image ids.
  write("other_det.json", R"({"image": {"id": "other", "width": 10, "height": 10}, "detections": []})");
  EXPECT_EQ(cmd_visualize(root_ / "other_det.json", root_ / "res" / "scene_0_res.json", svg, out), kExitPairing);
}

TEST(SideGridTest, SingleCellHasNoInteriorLines) {
  const ResultSide side{SideRole::kLeft, Quad{Point2{0, 0}, Point2{10, 1}, Point2{10, 9}, Point2{0, 10}}, 1, 1};
  const SideGrid g = side_grid(side);
  EXPECT_TRUE(g.vertical.empty());
  EXPECT_TRUE(g.horizontal.empty());

  // On a rectangle the separators sit at exact fractions.
  const ResultSide rect{SideRole::kRight, Quad{Point2{0, 0}, Point2{30, 0}, Point2{30, 20}, Point2{0, 20}}, 3, 2};
  const SideGrid r = side_grid(rect);
  ASSERT_EQ(r.vertical.size(), 2u);
  EXPECT_NEAR(r.vertical[0].a.x, 10.0, 1e-9);
  EXPECT_NEAR(r.vertical[1].b.x, 20.0, 1e-9);
  EXPECT_NEAR(r.horizontal[0].a.y, 10.0, 1e-9);
}

TEST(SvgTest, EscapesText) {
  ResultDocument doc{"a<b", {}};
  const std::string svg = render_svg({"a<b", 10, 10}, doc);
  EXPECT_NE(svg.find("<title>a&lt;b</title>"), std::string::npos);
}

}  // namespace
}  // namespace packstruct::cli
