// SPDX-License-Identifier: Apache-2.0
//
// Measurement math for detection and classification: box geometry,
// regression losses, greedy matching, PR/AP, and report aggregation.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "thermask/box.hpp"
#include "thermask/dataset.hpp"

namespace thermask::eval {

/// One predicted box with its confidence score.
struct Detection {
  std::string image_id;
  BoundingBox box;
  double confidence = 0.0;  // in [0,1]
  ClassLabel label;         // nullopt = class-agnostic MASK
};

/// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Complete-IoU regression loss:
///   1 - IoU + rho^2/c^2 + alpha*v
/// where rho is the center distance, c the enclosing-box diagonal, v the
/// aspect-ratio penalty and alpha = v / ((1 - IoU) + v). Zero iff pred == gt.
double ciou_loss(const BoundingBox& pred, const BoundingBox& gt);

/// Elementwise smooth-L1 (Huber-style), summed:
///   0.5*d^2/beta for |d| < beta, |d| - 0.5*beta otherwise.
double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta);

/// Result of matching detections against ground truth in one dataset.
struct MatchResult {
  std::vector<uint8_t> det_is_tp;   // aligned with the input detections
  std::vector<uint8_t> gt_matched;  // aligned with the input annotations
};

/// Greedy confidence-descending matcher. A detection is a true positive iff
/// its best-IoU unmatched ground-truth box in the same image has
/// IoU >= iou_threshold; each ground truth matches at most once. Ties in
/// confidence are broken by input order.
MatchResult match_detections(std::span<const Detection> dets,
                             std::span<const dataset::Annotation> gts,
                             double iou_threshold);

/// Confidence + TP flag pair, the input to average precision.
struct ScoredFlag {
  double confidence = 0.0;
  bool is_tp = false;
};

/// Area under the precision-recall curve with all-points interpolation
/// (precision envelope made monotone non-increasing before integration).
double average_precision(std::vector<ScoredFlag> flags, int n_gt);

/// The (recall, precision) staircase in ranking order, for plotting.
std::vector<std::pair<double, double>> pr_curve(std::vector<ScoredFlag> flags, int n_gt);

/// 2PR/(P+R); 0 when both are 0.
double f1_score(double precision, double recall);

struct DetectionMetrics {
  double precision = 0.0;  // at the confidence threshold
  double recall = 0.0;
  double map50 = 0.0;      // single class: AP at the matching IoU threshold
};

/// Detection metrics over one run: precision/recall at `confidence_threshold`
/// plus AP over the full ranking.
DetectionMetrics evaluate_detections(std::span<const Detection> dets,
                                     std::span<const dataset::Annotation> gts,
                                     double iou_threshold,
                                     double confidence_threshold);

/// Mean and population standard deviation over repeated runs.
struct DetectionReport {
  std::vector<DetectionMetrics> runs;
  DetectionMetrics mean;
  DetectionMetrics stddev;
};

DetectionReport aggregate_runs(const std::vector<DetectionMetrics>& runs);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class precision/recall/F1, accuracy, and the raw confusion counts
/// (rows = true class, cols = predicted class, in MaskClass order).
struct ClassificationReport {
  std::array<std::array<int64_t, 3>, 3> confusion{};
  std::array<ClassMetrics, 3> per_class{};
  double accuracy = 0.0;
};

ClassificationReport classification_report(std::span<const MaskClass> truth,
                                           std::span<const MaskClass> predicted);

/// Mean/std aggregate over repeated classification runs, keyed per metric.
struct ClassificationAggregate {
  std::vector<ClassificationReport> runs;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;
};

ClassificationAggregate aggregate_runs(const std::vector<ClassificationReport>& runs);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by n)
};

MeanStd mean_std(std::span<const double> values);

// JSON serialization ("schema":"v1"); field names follow the report tables
// (precision / recall / map50, per-class p / r / f1, accuracy).
std::string detection_report_json(const DetectionReport& report, double iou_threshold,
                                  double confidence_threshold);
std::string classification_report_json(const ClassificationReport& report);
std::string classification_aggregate_json(const ClassificationAggregate& agg);

}  // namespace thermask::eval
