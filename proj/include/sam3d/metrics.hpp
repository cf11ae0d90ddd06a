#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sam3d/box_lift.hpp"

namespace sam3d {

struct MatchPair {
  std::size_t det = 0;
  std::size_t gt = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::size_t> unmatched_dets;
  std::vector<std::size_t> unmatched_gts;
};

struct EvalReport {
  double ap = 0.0;
  double aph = 0.0;
  std::vector<std::pair<double, double>> pr;  // (recall, precision) per swept detection
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool no_ground_truth = false;
};

// Keeps boxes whose planar center lies strictly closer than max_dist.
std::vector<Box3D> range_filter(const std::vector<Box3D>& boxes, double max_dist);
DetectionSet range_filter(const DetectionSet& set, double max_dist);

// BEV IoU of the (x, y, dx, dy, theta) footprints.
double bev_iou(const Box3D& a, const Box3D& b);

/// Greedy matching: detections by descending score (ties: lower index)
/// each claim the free ground truth of highest IoU >= iou_thr (ties: lower
/// ground-truth index).
MatchResult match_detections(const DetectionSet& dets, const DetectionSet& gts, double iou_thr);

// 1 - |wrap(det - gt)| / pi with the difference wrapped to [-pi, pi].
double heading_weight(double det_theta, double gt_theta);

/// Folds per-frame matches; AP integrates the max-interpolated
/// precision/recall curve, APH does the same with heading-weighted true
/// positives in the precision numerator.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(double iou_thr = 0.7) : iou_thr_(iou_thr) {}

  void add_frame(const DetectionSet& dets, const DetectionSet& gts);
  EvalReport report() const;

 private:
  struct Record {
    double score;
    bool tp;
    double weight;
  };

  double iou_thr_;
  std::vector<Record> records_;
  std::size_t n_gt_ = 0;
};

EvalReport average_precision(const DetectionSet& dets, const DetectionSet& gts, double iou_thr);

nlohmann::json report_to_json(const EvalReport& r);

}  // namespace sam3d
