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

// Dataset evaluation: IoU matching of recognized units against annotations,
// per-image recognition error and unit extraction precision/recall.

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "packstruct/results.hpp"

namespace packstruct {

struct EvalConfig {
  double iou_threshold = 0.5;
  /// Also require the pallet category to match for a correct recognition.
  bool strict_pallet = false;

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "iou_threshold must lie in (0, 1]");
    }
  }
};

struct MatchPair {
  std::size_t gt = 0;
  std::size_t pred = 0;
  double iou = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchOutcome {
  std::vector<MatchPair> tp;
  std::vector<std::size_t> fp;  // prediction indices
  std::vector<std::size_t> fn;  // ground-truth indices
};

/// Greedy one-to-one matching in descending IoU order over pairs with
/// IoU >= threshold. Ties go to the lower (gt, pred) index pair. `iou` is
/// indexed [gt][pred].
inline MatchOutcome match_by_iou(const std::vector<std::vector<double>>& iou, std::size_t n_pred, double threshold) {
  const std::size_t n_gt = iou.size();
  std::vector<MatchPair> candidates;
  for (std::size_t g = 0; g < n_gt; ++g) {
    if (iou[g].size() != n_pred) throw Error(ErrorKind::kDimensionMismatch, "IoU matrix row has the wrong length");
    for (std::size_t p = 0; p < n_pred; ++p) {
      if (iou[g][p] >= threshold) candidates.push_back({g, p, iou[g][p]});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MatchPair& a, const MatchPair& b) { return a.iou > b.iou; });

  MatchOutcome out;
  std::vector<char> gt_used(n_gt, 0), pred_used(n_pred, 0);
  for (const MatchPair& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = pred_used[c.pred] = 1;
    out.tp.push_back(c);
  }
  for (std::size_t p = 0; p < n_pred; ++p) {
    if (!pred_used[p]) out.fp.push_back(p);
  }
  for (std::size_t g = 0; g < n_gt; ++g) {
    if (!gt_used[g]) out.fn.push_back(g);
  }
  return out;
}

/// Mask IoU of every (gt, pred) pair, rasterized on the image grid.
inline std::vector<std::vector<double>> mask_iou_matrix(const std::vector<Polygon>& gt, const std::vector<Polygon>& pred,
                                                        int width, int height) {
  std::vector<BinaryRaster> g, p;
  for (const Polygon& poly : gt) g.push_back(rasterize(poly, width, height));
  for (const Polygon& poly : pred) p.push_back(rasterize(poly, width, height));
  std::vector<std::vector<double>> out(g.size(), std::vector<double>(p.size(), 0.0));
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t b = 0; b < p.size(); ++b) out[a][b] = iou(g[a], p[b]);
  }
  return out;
}

inline MatchOutcome match_units(const std::vector<Polygon>& gt, const std::vector<Polygon>& pred, double threshold,
                                int width, int height) {
  return match_by_iou(mask_iou_matrix(gt, pred, width, height), pred.size(), threshold);
}

/// e = 1 - TP / (TP + FP + FN), and 0 when all three are empty. Evaluated
/// as (all - TP) / all so the result is rounded once.
inline double recognition_error(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t all = tp + fp + fn;
  return all == 0 ? 0.0 : static_cast<double>(all - tp) / static_cast<double>(all);
}

struct ImageError {
  std::string image_id;
  double e_i = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Moves matched pairs whose structure is wrong (correct[k] false for
/// outcome.tp[k]) from TP to FP, then computes e_i.
inline ImageError image_error(const MatchOutcome& outcome, const std::vector<bool>& correct, std::string image_id) {
  if (correct.size() != outcome.tp.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "one correctness flag per matched pair required");
  }
  const auto good = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), true));
  ImageError e{std::move(image_id), 0.0, good, outcome.fp.size() + (outcome.tp.size() - good), outcome.fn.size()};
  e.e_i = recognition_error(e.tp, e.fp, e.fn);
  return e;
}

inline double mean_error(const std::vector<ImageError>& per_image) {
  if (per_image.empty()) throw Error(ErrorKind::kEmptyInput, "mean error of an empty image set");
  double sum = 0.0;
  for (const ImageError& e : per_image) sum += e.e_i;
  return sum / static_cast<double>(per_image.size());
}

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  bool precision_defined = true;
  bool recall_defined = true;
};

/// Undefined ratios (zero denominator) are reported as 1 and flagged.
inline PrecisionRecall precision_recall(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrecisionRecall r;
  if (tp + fp > 0) {
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    r.precision_defined = false;
  }
  if (tp + fn > 0) {
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    r.recall_defined = false;
  }
  return r;
}

/// Count triples compare up to swapping left and right.
inline bool structure_correct(const AnnotatedUnit& gt, const ResultUnit& pred, bool strict_pallet) {
  if (!pred.ok) return false;
  if (pred.counts != gt.counts && pred.counts.mirrored() != gt.counts) return false;
  if (pred.package_category != gt.package_category) return false;
  return !strict_pallet || pred.pallet_category == gt.pallet_category;
}

struct SubsetStats {
  std::size_t count = 0;
  double mean_error = 0.0;
};

struct EvalReport {
  std::vector<ImageError> per_image;
  double mean_error = 0.0;
  /// Unit extraction: matches by mask IoU, before structure correctness.
  std::size_t extraction_tp = 0;
  std::size_t extraction_fp = 0;
  std::size_t extraction_fn = 0;
  PrecisionRecall extraction;
  std::size_t pallet_mismatches = 0;
  std::map<std::string, SubsetStats> subsets;
};

/// "klt" or "tray" when every annotated unit has that package category,
/// "mixed" otherwise, "empty" for images without units.
inline std::string subset_label(const ImageAnnotations& ann) {
  std::set<Category> cats;
  for (const AnnotatedUnit& u : ann.units) cats.insert(u.package_category);
  if (cats.empty()) return "empty";
  if (cats.size() > 1) return "mixed";
  return *cats.begin() == Category::kPkgKlt ? "klt" : "tray";
}

/// Evaluates paired annotation/result documents (paired by image id, order
/// irrelevant). Unpaired ids throw PairingError listing them.
inline EvalReport evaluate_dataset(const std::vector<ImageAnnotations>& annotations,
                                   const std::vector<ResultDocument>& results, const EvalConfig& cfg) {
  cfg.validate();
  std::map<std::string, const ImageAnnotations*> by_id;
  for (const ImageAnnotations& a : annotations) {
    if (!by_id.emplace(a.image.id, &a).second) {
      throw Error(ErrorKind::kPairingError, "duplicate annotation for image '" + a.image.id + "'");
    }
  }
  std::map<std::string, const ResultDocument*> res_by_id;
  for (const ResultDocument& r : results) {
    if (!res_by_id.emplace(r.image_id, &r).second) {
      throw Error(ErrorKind::kPairingError, "duplicate result for image '" + r.image_id + "'");
    }
  }
  std::string missing;
  for (const auto& [id, _] : by_id) {
    if (!res_by_id.contains(id)) missing += " annotation-only:" + id;
  }
  for (const auto& [id, _] : res_by_id) {
    if (!by_id.contains(id)) missing += " result-only:" + id;
  }
  if (!missing.empty()) throw Error(ErrorKind::kPairingError, "image ids differ:" + missing);

  EvalReport report;
  std::map<std::string, std::vector<ImageError>> subset_errors;
  for (const auto& [id, ann] : by_id) {
    const ResultDocument& res = *res_by_id.at(id);
    std::vector<Polygon> gt, pred;
    for (const AnnotatedUnit& u : ann->units) gt.push_back(u.polygon);
    for (const ResultUnit& u : res.units) pred.push_back(u.polygon);
    const MatchOutcome outcome = match_units(gt, pred, cfg.iou_threshold, ann->image.width, ann->image.height);

    std::vector<bool> correct;
    for (const MatchPair& m : outcome.tp) {
      const AnnotatedUnit& g = ann->units[m.gt];
      const ResultUnit& p = res.units[m.pred];
      correct.push_back(structure_correct(g, p, cfg.strict_pallet));
      if (p.ok && p.pallet_category != g.pallet_category) ++report.pallet_mismatches;
    }
    report.extraction_tp += outcome.tp.size();
    report.extraction_fp += outcome.fp.size();
    report.extraction_fn += outcome.fn.size();
    report.per_image.push_back(image_error(outcome, correct, id));
    subset_errors[subset_label(*ann)].push_back(report.per_image.back());
  }
  if (!report.per_image.empty()) report.mean_error = mean_error(report.per_image);
  report.extraction = precision_recall(report.extraction_tp, report.extraction_fp, report.extraction_fn);
  for (const auto& [label, errs] : subset_errors) report.subsets[label] = {errs.size(), mean_error(errs)};
  return report;
}

inline Json to_json(const EvalReport& r) {
  Json per_image = Json::array();
  for (const ImageError& e : r.per_image) {
    per_image.push_back({{"image_id", e.image_id}, {"e_i", e.e_i}, {"tp", e.tp}, {"fp", e.fp}, {"fn", e.fn}});
  }
  Json subsets = Json::object();
  for (const auto& [label, s] : r.subsets) subsets[label] = {{"count", s.count}, {"mean_error", s.mean_error}};
  return {{"per_image", std::move(per_image)},
          {"mean_error", r.mean_error},
          {"precision", r.extraction.precision},
          {"recall", r.extraction.recall},
          {"precision_defined", r.extraction.precision_defined},
          {"recall_defined", r.extraction.recall_defined},
          {"tp", r.extraction_tp},
          {"fp", r.extraction_fp},
          {"fn", r.extraction_fn},
          {"pallet_mismatches", r.pallet_mismatches},
          {"subsets", std::move(subsets)}};
}

namespace detail {

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

/// Two plain-text tables: unit extraction precision/recall, then mean
/// recognition error per subset and overall.
inline std::string render_table(const EvalReport& r) {
  std::string out;
  out += "Transport unit extraction\n";
  out += "  TP     FP     FN     Precision  Recall\n";
  char line[160];
  std::snprintf(line, sizeof line, "  %-6zu %-6zu %-6zu %-10s %s%s\n", r.extraction_tp, r.extraction_fp,
                r.extraction_fn, detail::fixed4(r.extraction.precision).c_str(),
                detail::fixed4(r.extraction.recall).c_str(),
                r.extraction.precision_defined && r.extraction.recall_defined ? "" : "  (undefined ratio set to 1)");
  out += line;
  out += "\nPackaging structure recognition\n";
  out += "  Subset   Images  Mean error\n";
  for (const auto& [label, s] : r.subsets) {
    std::snprintf(line, sizeof line, "  %-8s %-7zu %s\n", label.c_str(), s.count, detail::fixed4(s.mean_error).c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "  %-8s %-7zu %s\n", "all", r.per_image.size(), detail::fixed4(r.mean_error).c_str());
  out += line;
  return out;
}

}  // namespace packstruct
