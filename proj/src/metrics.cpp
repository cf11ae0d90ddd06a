#include "sam3d/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sam3d {

std::vector<Box3D> range_filter(const std::vector<Box3D>& boxes, double max_dist) {
  std::vector<Box3D> out;
  std::copy_if(boxes.begin(), boxes.end(), std::back_inserter(out),
               [&](const Box3D& b) { return std::hypot(b.x, b.y) < max_dist; });
  return out;
}

DetectionSet range_filter(const DetectionSet& set, double max_dist) {
  return {set.frame_id, range_filter(set.boxes, max_dist)};
}

double bev_iou(const Box3D& a, const Box3D& b) { return rotated_iou(a.footprint(), b.footprint()); }

MatchResult match_detections(const DetectionSet& dets, const DetectionSet& gts, double iou_thr) {
  std::vector<std::size_t> order(dets.boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets.boxes[a].score > dets.boxes[b].score;
  });

  MatchResult result;
  std::vector<bool> gt_taken(gts.boxes.size(), false);
  std::vector<bool> det_matched(dets.boxes.size(), false);
  for (std::size_t d : order) {
    double best_iou = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < gts.boxes.size(); ++g) {
      if (gt_taken[g]) continue;
      const double iou = bev_iou(dets.boxes[d], gts.boxes[g]);
      if (iou >= iou_thr && iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_iou >= 0.0) {
      gt_taken[best_gt] = true;
      det_matched[d] = true;
      result.pairs.push_back({d, best_gt, best_iou});
    }
  }
  for (std::size_t d = 0; d < dets.boxes.size(); ++d) {
    if (!det_matched[d]) result.unmatched_dets.push_back(d);
  }
  for (std::size_t g = 0; g < gts.boxes.size(); ++g) {
    if (!gt_taken[g]) result.unmatched_gts.push_back(g);
  }
  return result;
}

double heading_weight(double det_theta, double gt_theta) {
  constexpr double kPi = std::numbers::pi;
  double diff = std::remainder(det_theta - gt_theta, 2.0 * kPi);  // [-pi, pi]
  return std::clamp(1.0 - std::abs(diff) / kPi, 0.0, 1.0);
}

void EvalAccumulator::add_frame(const DetectionSet& dets, const DetectionSet& gts) {
  const MatchResult match = match_detections(dets, gts, iou_thr_);
  std::vector<Record> frame(dets.boxes.size());
  for (std::size_t d = 0; d < dets.boxes.size(); ++d) frame[d] = {dets.boxes[d].score, false, 0.0};
  for (const MatchPair& p : match.pairs) {
    frame[p.det].tp = true;
    frame[p.det].weight = heading_weight(dets.boxes[p.det].theta, gts.boxes[p.gt].theta);
  }
  records_.insert(records_.end(), frame.begin(), frame.end());
  n_gt_ += gts.boxes.size();
}

EvalReport EvalAccumulator::report() const {
  EvalReport r;
  std::vector<Record> sweep = records_;
  std::stable_sort(sweep.begin(), sweep.end(), [](const Record& a, const Record& b) { return a.score > b.score; });

  std::vector<double> recall(sweep.size()), precision(sweep.size()), precision_h(sweep.size());
  double tp = 0.0, tp_h = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i].tp) {
      tp += 1.0;
      tp_h += sweep[i].weight;
    }
    const double n = static_cast<double>(i + 1);
    recall[i] = n_gt_ == 0 ? 0.0 : tp / static_cast<double>(n_gt_);
    precision[i] = tp / n;
    precision_h[i] = tp_h / n;
    r.pr.emplace_back(recall[i], precision[i]);
  }
  r.tp = static_cast<std::size_t>(tp);
  r.fp = sweep.size() - r.tp;
  r.fn = n_gt_ - r.tp;
  if (n_gt_ == 0) {
    r.no_ground_truth = true;
    return r;
  }

  // Interpolate: precision at i becomes the max precision at any i' >= i.
  for (std::size_t i = sweep.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
    precision_h[i - 1] = std::max(precision_h[i - 1], precision_h[i]);
  }
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double step = recall[i] - prev_recall;
    r.ap += step * precision[i];
    r.aph += step * precision_h[i];
    prev_recall = recall[i];
  }
  return r;
}

EvalReport average_precision(const DetectionSet& dets, const DetectionSet& gts, double iou_thr) {
  EvalAccumulator acc(iou_thr);
  acc.add_frame(dets, gts);
  return acc.report();
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json pr = nlohmann::json::array();
  for (const auto& [rec, prec] : r.pr) pr.push_back({rec, prec});
  nlohmann::json j = {{"ap", r.ap}, {"aph", r.aph}, {"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"pr", pr}};
  if (r.no_ground_truth) j["warning"] = "no ground truth boxes; ap defined as 0";
  return j;
}

}  // namespace sam3d
