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

#include <algorithm>
#include <random>
#include <set>

#include "packstruct/detections.hpp"
#include "packstruct/synthgen.hpp"

namespace packstruct {
namespace {

DetectionRecord box_record(std::string id, Category c, double conf, Box b) {
  Polygon poly({b.min, {b.max.x, b.min.y}, b.max, {b.min.x, b.max.y}});
  return {std::move(id), c, conf, b, std::move(poly)};
}

ImageDetections image(std::vector<DetectionRecord> records, int w = 600, int h = 400) {
  return {{"img", w, h}, std::move(records)};
}

const char* kMinimal = R"({
  "image": {"id": "a", "width": 100, "height": 80},
  "detections": [{"id": "t0", "category": "transport_unit", "confidence": 0.9,
                  "bbox": [10, 10, 60, 70], "polygon": [[10, 10], [60, 10], [60, 70], [10, 70]]}]
})";

std::string with_record(const std::string& record) {
  return R"({"image": {"id": "a", "width": 100, "height": 80}, "detections": [)" + record + "]}";
}

int parse_error_index(const std::string& doc, const std::string& expected_text) {
  try {
    parse_image_detections(doc);
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(expected_text), std::string::npos) << e.what();
    return e.record_index();
  }
  ADD_FAILURE() << "no parse error for " << doc;
  return -2;
}

TEST(ParseDetectionsTest, MinimalDocument) {
  const ImageDetections d = parse_image_detections(kMinimal);
  EXPECT_EQ(d.image, (ImageInfo{"a", 100, 80}));
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].category, Category::kTransportUnit);
  EXPECT_EQ(d.records[0].bbox, (Box{{10, 10}, {60, 70}}));
  EXPECT_EQ(d.records[0].mask.size(), 4u);
}

TEST(ParseDetectionsTest, RejectsInvalidRecords) {
  const std::string ok_poly = R"("polygon": [[10, 10], [60, 10], [60, 70]])";
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "transport_unit", "confidence": 1.3,
      "bbox": [10, 10, 60, 70], )" + ok_poly + "}"), "confidence"), 0);
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "crate", "confidence": 0.5,
      "bbox": [10, 10, 60, 70], )" + ok_poly + "}"), "crate"), 0);
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "tu_side", "confidence": 0.5,
      "bbox": [10, 10, 160, 70], )" + ok_poly + "}"), "bbox"), 0);
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "tu_side", "confidence": 0.5,
      "bbox": [60, 10, 10, 70], )" + ok_poly + "}"), "bbox"), 0);
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "tu_side", "confidence": 0.5,
      "bbox": [20, 20, 50, 50], )" + ok_poly + "}"), "polygon"), 0);
  EXPECT_EQ(parse_error_index(with_record(R"({"id": "x", "category": "tu_side", "confidence": 0.5,
      "bbox": [10, 10, 60, 70]})"), "polygon"), 0);
  EXPECT_EQ(parse_error_index(R"({"image": {"id": "a", "width": 100}, "detections": []})", "height"), -1);
  EXPECT_EQ(parse_error_index("{\"image\": ", "malformed JSON"), -1);
  // Second record is the bad one.
  const std::string good = R"({"id": "g", "category": "pkg_klt", "confidence": 0.5, "bbox": [10, 10, 60, 70], )" +
                           ok_poly + "}";
  EXPECT_EQ(parse_error_index(with_record(good + R"(, {"id": "b", "category": "pkg_klt", "confidence": -0.1,
      "bbox": [10, 10, 60, 70], )" + ok_poly + "}"), "confidence"), 1);
}

TEST(ParseDetectionsTest, MaskMayExceedBoxWithinSlack) {
  // 50 px wide box: 2.5% per side is 1.25 px of slack.
  const std::string inside = R"({"id": "x", "category": "tu_side", "confidence": 0.5, "bbox": [10, 10, 60, 70],
      "polygon": [[8.8, 10], [61.2, 10], [61.2, 70], [8.8, 70]]})";
  EXPECT_NO_THROW(parse_image_detections(with_record(inside)));
  const std::string outside = R"({"id": "x", "category": "tu_side", "confidence": 0.5, "bbox": [10, 10, 60, 70],
      "polygon": [[8.7, 10], [60, 10], [60, 70], [8.7, 70]]})";
  EXPECT_THROW(parse_image_detections(with_record(outside)), ParseError);
}

std::vector<Scene> generated_corpus(int n) {
  SamplerSpec s;
  s.max_units = 3;
  std::vector<Scene> out;
  for (int k = 0; k < n; ++k) {
    const SceneSpec spec = sample_scene(s, 500 + k);
    out.push_back(generate_scene(spec.units, spec.camera, "scene_" + std::to_string(k)));
  }
  return out;
}

TEST(ParseDetectionsTest, GeneratedDocumentsRoundTrip) {
  for (const Scene& scene : generated_corpus(10)) {
    const Json det = to_json(scene.detections);
    EXPECT_EQ(to_json(parse_image_detections(det.dump())), det);
    const Json ann = to_json(scene.annotations);
    EXPECT_EQ(to_json(parse_annotations(ann.dump())), ann);
  }
}

TEST(ParseAnnotationsTest, CountsAndErrors) {
  const ImageAnnotations a = parse_annotations(R"({"image": {"id": "a", "width": 100, "height": 80}, "units": [
      {"polygon": [[0, 0], [50, 0], [50, 50]], "pallet_category": "pallet_wood", "package_category": "pkg_tray",
       "counts": {"h_left": 3, "h_right": 4, "v": 2}}]})");
  ASSERT_EQ(a.units.size(), 1u);
  EXPECT_EQ(a.units[0].counts.total(), 24);
  EXPECT_EQ(a.units[0].package_category, Category::kPkgTray);

  EXPECT_THROW(parse_annotations(R"({"image": {"id": "a", "width": 100, "height": 80}, "units": [
      {"polygon": [[0, 0], [50, 0], [50, 50]], "pallet_category": "pallet_wood", "package_category": "pkg_tray"}]})"),
               ParseError);
  EXPECT_THROW(parse_annotations(R"({"image": {"id": "a", "width": 100, "height": 80}, "units": [
      {"polygon": [[0, 0], [50, 0], [50, 50]], "pallet_category": "pkg_klt", "package_category": "pkg_tray",
       "counts": {"h_left": 3, "h_right": 4, "v": 2}}]})"),
               ParseError);
  EXPECT_THROW(parse_annotations(R"({"image": {"id": "a", "width": 100, "height": 80}, "units": [
      {"polygon": [[0, 0], [50, 0], [50, 50]], "pallet_category": "pallet_wood", "package_category": "pkg_tray",
       "counts": {"h_left": 0, "h_right": 4, "v": 2}}]})"),
               ParseError);
}

TEST(FilterTransportUnitsTest, Examples) {
  const FilterConfig cfg;
  const Box b{{100, 100}, {300, 300}};
  auto kept = filter_transport_units(image({box_record("a", Category::kTransportUnit, 0.8, b),
                                            box_record("b", Category::kTransportUnit, 0.9, b)}),
                                     cfg);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, "b");

  kept = filter_transport_units(
      image({box_record("thin", Category::kTransportUnit, 0.9, {{100, 100}, {110, 300}})}, 600, 400), cfg);
  EXPECT_TRUE(kept.empty());
  kept = filter_transport_units(
      image({box_record("low", Category::kTransportUnit, 0.4, b), box_record("side", Category::kTuSide, 0.9, b)}),
      cfg);
  EXPECT_TRUE(kept.empty());
}

TEST(FilterTransportUnitsTest, NoiseFreeSceneKeepsAllUnits) {
  SamplerSpec s;
  s.min_units = s.max_units = 3;
  const SceneSpec spec = sample_scene(s, 77);
  const Scene scene = generate_scene(spec.units, spec.camera, "three");
  EXPECT_EQ(filter_transport_units(scene.detections, FilterConfig{}).size(), 3u);
}

TEST(FilterTransportUnitsTest, PropertiesOnRandomRecords) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const FilterConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DetectionRecord> recs;
    const int n = 1 + static_cast<int>(u(rng) * 8);
    for (int k = 0; k < n; ++k) {
      const double x = u(rng) * 400, y = u(rng) * 250;
      const Box b{{x, y}, {x + 10 + u(rng) * 190, y + 10 + u(rng) * 140}};
      // Coarse confidences make ties common.
      const double conf = std::round(u(rng) * 4) / 4;
      recs.push_back(box_record("r" + std::to_string(k), Category::kTransportUnit, conf, b));
    }
    const auto kept = filter_transport_units(image(recs), cfg);
    for (std::size_t a = 0; a < kept.size(); ++a) {
      EXPECT_GE(kept[a].confidence, cfg.min_confidence_tu);
      EXPECT_GE(kept[a].bbox.width(), 0.05 * 600);
      EXPECT_GE(kept[a].bbox.height(), 0.05 * 400);
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        EXPECT_LE(box_iou(kept[a].bbox, kept[b].bbox), cfg.suppression_iou);
        EXPECT_TRUE(kept[a].confidence > kept[b].confidence ||
                    (kept[a].confidence == kept[b].confidence && kept[a].id < kept[b].id));
      }
    }
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto again = filter_transport_units(image(recs), cfg);
    ASSERT_EQ(again.size(), kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) EXPECT_EQ(again[k].id, kept[k].id);
  }
}

TEST(AssembleUnitTest, NoiseFreeUnit) {
  UnitSpec u;
  u.n_h_left = 3;
  u.n_h_right = 2;
  u.n_v = 2;
  u.package_dims = {0.38, 0.4, 0.38};
  u.yaw = -0.5;
  const Scene scene = generate_scene({u}, CameraSpec{}, "one");
  const auto units = filter_transport_units(scene.detections, FilterConfig{});
  ASSERT_EQ(units.size(), 1u);
  const TransportUnitHypothesis hyp = assemble_unit(units[0], scene.detections, FilterConfig{});
  EXPECT_EQ(hyp.pallet.category, Category::kPalletWood);
  EXPECT_EQ(hyp.sides[0].category, Category::kTuSide);
  EXPECT_EQ(hyp.sides[1].category, Category::kTuSide);
  EXPECT_EQ(hyp.packages.size(), 3u * 2 + 2u * 2);
}

TEST(AssembleUnitTest, FiltersAndErrors) {
  const FilterConfig cfg;
  const DetectionRecord unit = box_record("u", Category::kTransportUnit, 0.9, {{100, 100}, {300, 300}});
  const DetectionRecord pallet = box_record("p", Category::kPalletWood, 0.9, {{100, 250}, {300, 300}});
  const DetectionRecord s1 = box_record("s1", Category::kTuSide, 0.9, {{100, 100}, {200, 250}});
  const DetectionRecord s2 = box_record("s2", Category::kTuSide, 0.9, {{200, 100}, {300, 250}});
  const DetectionRecord half_in = box_record("k-half", Category::kPkgKlt, 0.9, {{250, 120}, {350, 160}});
  const DetectionRecord inside = box_record("k-in", Category::kPkgKlt, 0.9, {{110, 120}, {150, 160}});

  TransportUnitHypothesis hyp = assemble_unit(unit, image({unit, pallet, s1, s2, half_in, inside}), cfg);
  ASSERT_EQ(hyp.packages.size(), 1u);
  EXPECT_EQ(hyp.packages[0].id, "k-in");

  try {
    assemble_unit(unit, image({unit, pallet, inside}), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSideCountError);
    EXPECT_EQ(e.values(), std::vector<int>{0});
    EXPECT_EQ(e.unit_id(), "u");
  }
  const DetectionRecord pallet2 = box_record("p2", Category::kPalletPlastic, 0.8, {{100, 260}, {300, 300}});
  try {
    assemble_unit(unit, image({unit, pallet, pallet2, s1, s2}), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPalletCountError);
    EXPECT_EQ(e.values(), std::vector<int>{2});
  }
  const DetectionRecord tray = box_record("t", Category::kPkgTray, 0.9, {{210, 120}, {250, 160}});
  try {
    assemble_unit(unit, image({unit, pallet, s1, s2, inside, tray}), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMixedPackageCategories);
  }
  // A tiny side is not a side.
  const DetectionRecord speck = box_record("s3", Category::kTuSide, 0.9, {{150, 150}, {155, 155}});
  EXPECT_NO_THROW(assemble_unit(unit, image({unit, pallet, s1, s2, speck, inside}), cfg));
}

TEST(AssembleUnitTest, KeptMembersSatisfyContainment) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FilterConfig cfg;
  const DetectionRecord unit = box_record("u", Category::kTransportUnit, 0.9, {{150, 100}, {450, 300}});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DetectionRecord> recs{unit, box_record("p", Category::kPalletWood, 0.9, {{160, 280}, {440, 300}}),
                                      box_record("s1", Category::kTuSide, 0.9, {{160, 110}, {300, 280}}),
                                      box_record("s2", Category::kTuSide, 0.9, {{300, 110}, {440, 280}})};
    for (int k = 0; k < 20; ++k) {
      const double x = 100 + u(rng) * 380, y = 60 + u(rng) * 260;
      recs.push_back(box_record("k" + std::to_string(k), Category::kPkgKlt, u(rng), {{x, y}, {x + 30, y + 30}}));
    }
    const TransportUnitHypothesis hyp = assemble_unit(unit, image(recs), cfg);
    std::set<std::string> kept;
    for (const DetectionRecord& p : hyp.packages) kept.insert(p.id);
    for (const DetectionRecord& r : recs) {
      if (r.category != Category::kPkgKlt) continue;
      // Containment recomputed from scratch.
      const double ix = std::max(0.0, std::min(r.bbox.max.x, 450.0) - std::max(r.bbox.min.x, 150.0));
      const double iy = std::max(0.0, std::min(r.bbox.max.y, 300.0) - std::max(r.bbox.min.y, 100.0));
      const bool expected = r.confidence >= 0.5 && ix * iy / (30.0 * 30.0) >= 0.6;
      EXPECT_EQ(kept.contains(r.id), expected) << r.id;
    }
  }
}

}  // namespace
}  // namespace packstruct
