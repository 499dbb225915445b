// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "thermask/eval.hpp"
#include "thermask/rng.hpp"

using namespace thermask;
using namespace thermask::eval;

namespace {

// Independent rasterization oracle: counts cell centers of a 1000x1000
// discretization of [0,100]^2 (cell 0.1), restricted to the enclosing
// rectangle of the pair. Exact for integer-cornered boxes.
double iou_raster_oracle(const BoundingBox& a, const BoundingBox& b) {
  const double cell = 0.1;
  const double x_lo = std::min(a.x_min, b.x_min), x_hi = std::max(a.x_max, b.x_max);
  const double y_lo = std::min(a.y_min, b.y_min), y_hi = std::max(a.y_max, b.y_max);
  long in_a = 0, in_b = 0, in_both = 0;
  for (long iy = std::lround(std::floor(y_lo / cell)); iy * cell < y_hi; ++iy) {
    const double y = (iy + 0.5) * cell;
    for (long ix = std::lround(std::floor(x_lo / cell)); ix * cell < x_hi; ++ix) {
      const double x = (ix + 0.5) * cell;
      const bool inside_a = x > a.x_min && x < a.x_max && y > a.y_min && y < a.y_max;
      const bool inside_b = x > b.x_min && x < b.x_max && y > b.y_min && y < b.y_max;
      in_a += inside_a;
      in_b += inside_b;
      in_both += inside_a && inside_b;
    }
  }
  const long uni = in_a + in_b - in_both;
  return uni > 0 ? static_cast<double>(in_both) / uni : 0.0;
}

// Brute-force AP: precision/recall evaluated at every distinct confidence
// threshold, then exact envelope integration.
double ap_threshold_oracle(const std::vector<ScoredFlag>& flags, int n_gt) {
  std::vector<double> thresholds;
  for (const auto& f : flags) thresholds.push_back(f.confidence);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<std::pair<double, double>> points;  // (recall, precision)
  for (double t : thresholds) {
    int tp = 0, fp = 0;
    for (const auto& f : flags)
      if (f.confidence >= t) (f.is_tp ? ++tp : ++fp);
    points.emplace_back(static_cast<double>(tp) / n_gt,
                        static_cast<double>(tp) / (tp + fp));
  }
  std::sort(points.begin(), points.end());
  double ap = 0, prev_r = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    double p_max = 0;
    for (size_t j = i; j < points.size(); ++j) p_max = std::max(p_max, points[j].second);
    ap += (points[i].first - prev_r) * p_max;
    prev_r = points[i].first;
  }
  return ap;
}

BoundingBox random_int_box(Rng& rng) {
  const int x0 = rng.uniform_int(0, 89);
  const int y0 = rng.uniform_int(0, 89);
  const int x1 = x0 + rng.uniform_int(1, 99 - x0);
  const int y1 = y0 + rng.uniform_int(1, 99 - y0);
  return {double(x0), double(y0), double(x1), double(y1)};
}

dataset::Annotation gt(const std::string& id, BoundingBox box) {
  return {id, std::nullopt, box};
}

}  // namespace

TEST_CASE("iou basics") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, {20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, {5, 0, 15, 10}) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(iou(a, {10, 0, 20, 10}) == 0.0);  // touching edges do not intersect
}

TEST_CASE("iou symmetry and range on random boxes") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = random_int_box(rng), b = random_int_box(rng);
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(a, a) == 1.0);
  }
}

TEST_CASE("iou agrees with rasterization oracle") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_int_box(rng), b = random_int_box(rng);
    CHECK(std::abs(iou(a, b) - iou_raster_oracle(a, b)) <= 2e-3);
  }
}

TEST_CASE("ciou loss") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(ciou_loss(a, a) == 0.0);
  // Same center, same aspect ratio: only the IoU term survives.
  CHECK(ciou_loss({0, 0, 10, 10}, {2.5, 2.5, 7.5, 7.5}) == doctest::Approx(0.75).epsilon(1e-12));

  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_int_box(rng), g = random_int_box(rng);
    const double loss = ciou_loss(p, g);
    CHECK(loss >= 1.0 - iou(p, g) - 1e-12);
    if (!(p == g)) CHECK(loss > 0.0);
    const bool same_center_aspect =
        std::abs(p.center_x() - g.center_x()) < 1e-12 &&
        std::abs(p.center_y() - g.center_y()) < 1e-12 &&
        std::abs(p.width() * g.height() - g.width() * p.height()) < 1e-9;
    if (same_center_aspect)
      CHECK(loss == doctest::Approx(1.0 - iou(p, g)).epsilon(1e-12));
    else
      CHECK(loss > 1.0 - iou(p, g));
  }
}

TEST_CASE("smooth l1") {
  const std::vector<double> z{0.0};
  CHECK(smooth_l1(z, z, 1.0) == 0.0);
  CHECK(smooth_l1(std::vector<double>{0.5}, z, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(smooth_l1(std::vector<double>{2.0}, z, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(smooth_l1(std::vector<double>{1, 2}, z, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_l1(z, z, 0.0), std::invalid_argument);
}

TEST_CASE("greedy matching") {
  const std::vector<dataset::Annotation> gts{gt("a", {10, 10, 20, 20})};

  SUBCASE("exact hit") {
    const std::vector<Detection> dets{{"a", {10, 10, 20, 20}, 0.9, std::nullopt}};
    const auto m = match_detections(dets, gts, 0.5);
    CHECK(m.det_is_tp == std::vector<uint8_t>{1});
    CHECK(m.gt_matched == std::vector<uint8_t>{1});
  }
  SUBCASE("duplicate detection becomes FP") {
    const std::vector<Detection> dets{{"a", {10, 10, 20, 20}, 0.9, std::nullopt},
                                      {"a", {10, 10, 20, 20}, 0.8, std::nullopt}};
    const auto m = match_detections(dets, gts, 0.5);
    CHECK(m.det_is_tp == std::vector<uint8_t>{1, 0});
  }
  SUBCASE("ties keep input order") {
    const std::vector<Detection> dets{{"a", {10, 10, 20, 20}, 0.7, std::nullopt},
                                      {"a", {10, 10, 20, 20}, 0.7, std::nullopt}};
    const auto m = match_detections(dets, gts, 0.5);
    CHECK(m.det_is_tp == std::vector<uint8_t>{1, 0});
  }
  SUBCASE("IoU below threshold is FP") {
    // 10x10 det shifted to overlap 4.9x10: IoU = 49/151 < 0.5
    const std::vector<Detection> dets{{"a", {15.1, 10, 25.1, 20}, 0.9, std::nullopt}};
    const auto m = match_detections(dets, gts, 0.5);
    CHECK(m.det_is_tp == std::vector<uint8_t>{0});
    CHECK(m.gt_matched == std::vector<uint8_t>{0});
  }
  SUBCASE("no cross-image matches") {
    const std::vector<Detection> dets{{"b", {10, 10, 20, 20}, 0.9, std::nullopt}};
    const auto m = match_detections(dets, gts, 0.5);
    CHECK(m.det_is_tp == std::vector<uint8_t>{0});
  }
}

TEST_CASE("average precision hand cases") {
  CHECK(average_precision({{0.9, true}, {0.8, true}}, 2) == 1.0);
  CHECK(average_precision({{0.9, false}, {0.8, false}}, 2) == 0.0);
  CHECK(average_precision({{0.9, true}, {0.8, false}}, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(average_precision({{0.9, true}}, 0), std::invalid_argument);
  CHECK(average_precision({}, 3) == 0.0);
}

TEST_CASE("average precision equals threshold-sweep oracle") {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const int n = rng.uniform_int(1, 10);
    const int n_gt = rng.uniform_int(1, 10);
    std::vector<ScoredFlag> flags;
    int tp_budget = n_gt;
    for (int k = 0; k < n; ++k) {
      const bool tp = tp_budget > 0 && rng.uniform() < 0.5;
      if (tp) --tp_budget;
      flags.push_back({rng.uniform(), tp});
    }
    CHECK(average_precision(flags, n_gt) ==
          doctest::Approx(ap_threshold_oracle(flags, n_gt)).epsilon(1e-12));
  }
}

TEST_CASE("average precision invariant under monotone confidence transforms") {
  Rng rng(19);
  for (int i = 0; i < 100; ++i) {
    const int n = rng.uniform_int(1, 12);
    std::vector<ScoredFlag> flags;
    for (int k = 0; k < n; ++k) flags.push_back({rng.uniform(), rng.uniform() < 0.4});
    const double base = average_precision(flags, 6);
    auto mapped = flags;
    for (auto& f : mapped) f.confidence = f.confidence * f.confidence;  // monotone on [0,1)
    CHECK(average_precision(mapped, 6) == base);
    for (auto& f : mapped) f.confidence = 0.25 + std::exp(f.confidence);
    CHECK(average_precision(mapped, 6) == base);
  }
}

TEST_CASE("f1 score") {
  CHECK(f1_score(0.96, 0.90) == doctest::Approx(0.92903).epsilon(1e-4));
  CHECK(std::abs(f1_score(0.96, 0.90) - 0.93) <= 0.005);
  CHECK(f1_score(0.85, 1.00) == doctest::Approx(0.91892).epsilon(1e-4));
  CHECK(std::abs(f1_score(0.85, 1.00) - 0.92) <= 0.005);
  CHECK(f1_score(1.0, 0.0) == 0.0);
  CHECK(f1_score(0.0, 0.0) == 0.0);
}

TEST_CASE("classification report") {
  using enum MaskClass;
  SUBCASE("all correct") {
    const std::vector<MaskClass> y{FFP2, SURGERY, CLOTH, CLOTH};
    const auto rep = classification_report(y, y);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.confusion[0][0] == 1);
    CHECK(rep.confusion[2][2] == 2);
    CHECK(rep.confusion[0][1] == 0);
    for (const auto& pc : rep.per_class) {
      CHECK(pc.precision == 1.0);
      CHECK(pc.recall == 1.0);
    }
  }
  SUBCASE("hand-counted case") {
    const std::vector<MaskClass> truth{FFP2, FFP2, SURGERY};
    const std::vector<MaskClass> pred{FFP2, SURGERY, SURGERY};
    const auto rep = classification_report(truth, pred);
    CHECK(rep.accuracy == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(rep.per_class[int(FFP2)].recall == doctest::Approx(0.5));
    CHECK(rep.per_class[int(SURGERY)].precision == doctest::Approx(0.5));
  }
  SUBCASE("single-class data leaves others at zero") {
    const std::vector<MaskClass> y{CLOTH, CLOTH};
    const auto rep = classification_report(y, y);
    CHECK(rep.per_class[int(CLOTH)].precision == 1.0);
    CHECK(rep.per_class[int(CLOTH)].recall == 1.0);
    CHECK(rep.per_class[int(FFP2)].precision == 0.0);
    CHECK(rep.per_class[int(FFP2)].f1 == 0.0);
  }
  SUBCASE("accuracy equals mean indicator") {
    Rng rng(23);
    std::vector<MaskClass> truth, pred;
    int agree = 0;
    for (int i = 0; i < 200; ++i) {
      truth.push_back(kMaskClasses[rng.uniform_int(0, 2)]);
      pred.push_back(kMaskClasses[rng.uniform_int(0, 2)]);
      agree += truth.back() == pred.back();
    }
    const auto rep = classification_report(truth, pred);
    CHECK(rep.accuracy == doctest::Approx(agree / 200.0).epsilon(1e-12));
  }
  SUBCASE("length mismatch") {
    const std::vector<MaskClass> a{FFP2}, b{FFP2, CLOTH};
    CHECK_THROWS_AS(classification_report(a, b), std::invalid_argument);
  }
}

TEST_CASE("aggregation mean and population std") {
  const std::vector<double> vals{0.9, 1.0, 0.8};
  const auto ms = mean_std(vals);
  CHECK(ms.mean == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(ms.stddev == doctest::Approx(0.081649658).epsilon(1e-6));

  const DetectionMetrics run{0.9, 0.8, 0.95};
  const auto rep = aggregate_runs(std::vector<DetectionMetrics>{run, run, run});
  CHECK(rep.runs.size() == 3);
  CHECK(rep.mean.precision == doctest::Approx(0.9));
  CHECK(rep.stddev.precision == 0.0);
  CHECK(rep.stddev.map50 == 0.0);

  const auto single = aggregate_runs(std::vector<DetectionMetrics>{run});
  CHECK(single.mean.recall == doctest::Approx(0.8));
  CHECK(single.stddev.recall == 0.0);

  CHECK_THROWS_AS(aggregate_runs(std::vector<DetectionMetrics>{}), std::invalid_argument);
}

TEST_CASE("detection report JSON carries runs and mean/std blocks") {
  const DetectionMetrics a{1.0, 0.5, 0.75}, b{0.8, 0.7, 0.85};
  const auto rep = aggregate_runs({a, b});
  const std::string js = detection_report_json(rep, 0.5, 0.5);
  CHECK(js.find("\"schema\": \"v1\"") != std::string::npos);
  CHECK(js.find("\"map50\"") != std::string::npos);
  CHECK(js.find("\"runs\"") != std::string::npos);
  CHECK(js.find("\"std\"") != std::string::npos);
}
