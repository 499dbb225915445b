// SPDX-License-Identifier: Apache-2.0
#include "thermask/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace thermask::eval {

using json = nlohmann::json;

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double ciou_loss(const BoundingBox& pred, const BoundingBox& gt) {
  const double overlap = iou(pred, gt);
  const double dx = pred.center_x() - gt.center_x();
  const double dy = pred.center_y() - gt.center_y();
  const double rho2 = dx * dx + dy * dy;
  const double cw = std::max(pred.x_max, gt.x_max) - std::min(pred.x_min, gt.x_min);
  const double ch = std::max(pred.y_max, gt.y_max) - std::min(pred.y_min, gt.y_min);
  const double c2 = cw * cw + ch * ch;
  const double atan_diff =
      std::atan2(gt.width(), gt.height()) - std::atan2(pred.width(), pred.height());
  const double v = 4.0 / (M_PI * M_PI) * atan_diff * atan_diff;
  const double denom = (1.0 - overlap) + v;
  const double alpha = denom > 0 ? v / denom : 0.0;
  const double dist = c2 > 0 ? rho2 / c2 : 0.0;
  return (1.0 - overlap) + dist + alpha * v;
}

double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta) {
  if (pred.size() != target.size())
    throw std::invalid_argument("smooth_l1: length mismatch");
  if (beta <= 0) throw std::invalid_argument("smooth_l1: beta must be positive");
  double total = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = std::abs(pred[i] - target[i]);
    total += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
  }
  return total;
}

MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const dataset::Annotation> gts,
                             double iou_threshold) {
  if (iou_threshold <= 0 || iou_threshold >= 1)
    throw std::invalid_argument("match_detections: threshold must be in (0,1)");
  MatchResult result;
  result.det_is_tp.assign(dets.size(), 0);
  result.gt_matched.assign(gts.size(), 0);

  // Rank by descending confidence; stable so equal scores keep input order.
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  for (size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& det = dets[order[rank]];
    double best = 0.0;
    size_t best_gt = gts.size();
    for (size_t g = 0; g < gts.size(); ++g) {
      if (result.gt_matched[g] || gts[g].image_id != det.image_id) continue;
      const double v = iou(det.box, gts[g].box);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best >= iou_threshold) {
      result.det_is_tp[order[rank]] = 1;
      result.gt_matched[best_gt] = 1;
    }
  }
  return result;
}

namespace {

// Cumulative (recall, precision) points in ranking order.
std::vector<std::pair<double, double>> ranked_pr_points(std::vector<ScoredFlag>& flags,
                                                        int n_gt) {
  std::stable_sort(flags.begin(), flags.end(), [](const ScoredFlag& a, const ScoredFlag& b) {
    return a.confidence > b.confidence;
  });
  std::vector<std::pair<double, double>> points;
  points.reserve(flags.size());
  int tp = 0, fp = 0;
  for (const auto& f : flags) {
    f.is_tp ? ++tp : ++fp;
    points.emplace_back(static_cast<double>(tp) / n_gt,
                        static_cast<double>(tp) / (tp + fp));
  }
  return points;
}

}  // namespace

double average_precision(std::vector<ScoredFlag> flags, int n_gt) {
  if (n_gt <= 0) throw std::invalid_argument("average_precision: n_gt must be positive");
  if (flags.empty()) return 0.0;
  auto points = ranked_pr_points(flags, n_gt);
  // Monotone non-increasing precision envelope, right to left.
  for (size_t i = points.size() - 1; i-- > 0;)
    points[i].second = std::max(points[i].second, points[i + 1].second);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& [recall, precision] : points) {
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

std::vector<std::pair<double, double>> pr_curve(std::vector<ScoredFlag> flags, int n_gt) {
  if (n_gt <= 0) throw std::invalid_argument("pr_curve: n_gt must be positive");
  return ranked_pr_points(flags, n_gt);
}

double f1_score(double precision, double recall) {
  if (precision < 0 || precision > 1 || recall < 0 || recall > 1)
    throw std::invalid_argument("f1_score: inputs must be in [0,1]");
  const double denom = precision + recall;
  return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

DetectionMetrics evaluate_detections(std::span<const Detection> dets,
                                     std::span<const dataset::Annotation> gts,
                                     double iou_threshold,
                                     double confidence_threshold) {
  if (gts.empty()) throw std::invalid_argument("evaluate_detections: no ground truth");
  const MatchResult match = match_detections(dets, gts, iou_threshold);

  std::vector<ScoredFlag> flags(dets.size());
  for (size_t i = 0; i < dets.size(); ++i)
    flags[i] = {dets[i].confidence, match.det_is_tp[i] != 0};

  DetectionMetrics m;
  m.map50 = average_precision(flags, static_cast<int>(gts.size()));

  int tp = 0, fp = 0;
  for (size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].confidence < confidence_threshold) continue;
    match.det_is_tp[i] ? ++tp : ++fp;
  }
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  m.recall = static_cast<double>(tp) / gts.size();
  return m;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: empty input");
  const bool all_equal =
      std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  if (all_equal) return {values[0], 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

DetectionReport aggregate_runs(const std::vector<DetectionMetrics>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: empty run list");
  DetectionReport report;
  report.runs = runs;
  auto collect = [&](auto member) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const auto& r : runs) v.push_back(r.*member);
    return mean_std(v);
  };
  const auto p = collect(&DetectionMetrics::precision);
  const auto r = collect(&DetectionMetrics::recall);
  const auto a = collect(&DetectionMetrics::map50);
  report.mean = {p.mean, r.mean, a.mean};
  report.stddev = {p.stddev, r.stddev, a.stddev};
  return report;
}

ClassificationReport classification_report(std::span<const MaskClass> truth,
                                           std::span<const MaskClass> predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("classification_report: length mismatch");
  if (truth.empty()) throw std::invalid_argument("classification_report: empty input");
  ClassificationReport rep;
  for (size_t i = 0; i < truth.size(); ++i)
    ++rep.confusion[static_cast<int>(truth[i])][static_cast<int>(predicted[i])];

  int64_t trace = 0;
  for (int c = 0; c < 3; ++c) {
    trace += rep.confusion[c][c];
    int64_t row = 0, col = 0;
    for (int k = 0; k < 3; ++k) {
      row += rep.confusion[c][k];  // true == c
      col += rep.confusion[k][c];  // predicted == c
    }
    const double p = col > 0 ? static_cast<double>(rep.confusion[c][c]) / col : 0.0;
    const double r = row > 0 ? static_cast<double>(rep.confusion[c][c]) / row : 0.0;
    rep.per_class[c] = {p, r, f1_score(p, r)};
  }
  rep.accuracy = static_cast<double>(trace) / truth.size();
  return rep;
}

ClassificationAggregate aggregate_runs(const std::vector<ClassificationReport>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: empty run list");
  ClassificationAggregate agg;
  agg.runs = runs;
  auto add_metric = [&](const std::string& key, auto getter) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const auto& r : runs) v.push_back(getter(r));
    const auto ms = mean_std(v);
    agg.mean[key] = ms.mean;
    agg.stddev[key] = ms.stddev;
  };
  add_metric("accuracy", [](const ClassificationReport& r) { return r.accuracy; });
  for (int c = 0; c < 3; ++c) {
    const std::string name = to_string(kMaskClasses[c]);
    add_metric(name + ".p", [c](const ClassificationReport& r) { return r.per_class[c].precision; });
    add_metric(name + ".r", [c](const ClassificationReport& r) { return r.per_class[c].recall; });
    add_metric(name + ".f1", [c](const ClassificationReport& r) { return r.per_class[c].f1; });
  }
  return agg;
}

namespace {

json metrics_json(const DetectionMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"map50", m.map50}};
}

json class_block(const ClassificationReport& rep) {
  json per_class;
  for (int c = 0; c < 3; ++c) {
    per_class[to_string(kMaskClasses[c])] = {{"p", rep.per_class[c].precision},
                                             {"r", rep.per_class[c].recall},
                                             {"f1", rep.per_class[c].f1}};
  }
  json confusion = json::array();
  for (int r = 0; r < 3; ++r) confusion.push_back(rep.confusion[r]);
  return json{{"confusion", confusion},
              {"per_class", per_class},
              {"accuracy", rep.accuracy}};
}

}  // namespace

std::string detection_report_json(const DetectionReport& report, double iou_threshold,
                                  double confidence_threshold) {
  json runs = json::array();
  for (const auto& r : report.runs) runs.push_back(metrics_json(r));
  json doc{{"schema", "v1"},
           {"kind", "detection"},
           {"iou_threshold", iou_threshold},
           {"confidence_threshold", confidence_threshold},
           {"runs", runs},
           {"mean", metrics_json(report.mean)},
           {"std", metrics_json(report.stddev)}};
  return doc.dump(2) + "\n";
}

std::string classification_report_json(const ClassificationReport& report) {
  json doc = class_block(report);
  doc["schema"] = "v1";
  doc["kind"] = "classification";
  json classes = json::array();
  for (MaskClass c : kMaskClasses) classes.push_back(to_string(c));
  doc["classes"] = classes;
  return doc.dump(2) + "\n";
}

std::string classification_aggregate_json(const ClassificationAggregate& agg) {
  json runs = json::array();
  for (const auto& r : agg.runs) runs.push_back(class_block(r));
  json doc{{"schema", "v1"},
           {"kind", "classification_aggregate"},
           {"runs", runs},
           {"mean", agg.mean},
           {"std", agg.stddev}};
  return doc.dump(2) + "\n";
}

}  // namespace thermask::eval
