#include "sam3d/box_lift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "sam3d/error.hpp"
#include "sam3d/prompt_grid.hpp"

namespace sam3d {

nlohmann::json detections_to_json(const DetectionSet& set) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const Box3D& b : set.boxes) {
    boxes.push_back({{"x", b.x}, {"y", b.y}, {"z", b.z}, {"dx", b.dx}, {"dy", b.dy}, {"dz", b.dz},
                     {"theta", b.theta}, {"score", b.score}});
  }
  return {{"frame_id", set.frame_id}, {"boxes", boxes}};
}

DetectionSet detections_from_json(const nlohmann::json& j) {
  try {
    DetectionSet set;
    set.frame_id = j.at("frame_id").get<std::string>();
    for (const auto& b : j.at("boxes")) {
      Box3D box{b.at("x").get<double>(),  b.at("y").get<double>(),  b.at("z").get<double>(),
                b.at("dx").get<double>(), b.at("dy").get<double>(), b.at("dz").get<double>(),
                b.at("theta").get<double>(), b.value("score", 1.0)};
      if (!(box.score >= 0.0 && box.score <= 1.0)) throw Error(ErrorKind::kFormatError, "score outside [0,1]");
      set.boxes.push_back(box);
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("detection set: ") + e.what());
  }
}

DetectionSet load_detections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, path.string() + ": " + e.what());
  }
  return detections_from_json(j);
}

void save_detections(const DetectionSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, detections_to_json(set).dump(2) + "\n");
}

void PipelineConfig::validate() const {
  grid.validate();
  thresholds.validate();
  if (prompt_n < 1) throw Error(ErrorKind::kConfigError, "prompt_n must be >= 1");
  if (prune_radius < 0) throw Error(ErrorKind::kConfigError, "prune_radius must be >= 0");
  if (!(dedup_iou > 0.0 && dedup_iou <= 1.0)) throw Error(ErrorKind::kConfigError, "dedup_iou must be in (0,1]");
}

Box3D lift_box(const RotatedBox2D& box, const GridConfig& grid, double score) {
  Box3D out;
  out.x = grid.range.ux - (box.cx + 0.5) * grid.sx;
  out.y = grid.range.uy - (box.cy + 0.5) * grid.sy;
  out.dx = box.dx * grid.sx;
  out.dy = box.dy * grid.sy;
  out.theta = box.theta;
  out.score = score;
  return out;
}

RotatedBox2D box_to_pixels(const Box3D& box, const GridConfig& grid) {
  return {(grid.range.ux - box.x) / grid.sx - 0.5, (grid.range.uy - box.y) / grid.sy - 0.5,
          box.dx / grid.sx, box.dy / grid.sy, box.theta};
}

Box3D vertical_attributes(const Box3D& box, const PointCloud& cloud, const GridConfig& grid) {
  const RotatedBox2D px_box = box_to_pixels(box, grid);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Point& p : cloud.points) {
    const Vec2 q{(grid.range.ux - p.x) / grid.sx - 0.5, (grid.range.uy - p.y) / grid.sy - 0.5};
    if (point_in_rotated_rect(q, px_box)) {
      lo = std::min(lo, static_cast<double>(p.z));
      hi = std::max(hi, static_cast<double>(p.z));
    }
  }
  if (lo > hi) throw Error(ErrorKind::kNoSupportingPoints, "no points inside the box footprint");
  Box3D out = box;
  out.dz = hi - lo;
  out.z = lo + out.dz / 2;
  return out;
}

DetectionSet detect_frame(const PointCloud& cloud, const PipelineConfig& cfg, Segmenter& seg, FrameTrace* trace) {
  cfg.validate();
  DetectionSet result;
  result.frame_id = cloud.frame_id;

  const PointCloud cropped = crop_to_range(cloud, cfg.grid.range);
  if (cropped.empty()) {
    if (trace != nullptr) *trace = FrameTrace{BevImage(cfg.grid.height(), cfg.grid.width(), cfg.grid)};
    return result;
  }
  const PointCloud normalized = normalize_intensity(cropped, cfg.intensity_mode);
  const BevImage bev = dilate(rasterize(normalized, cfg.grid, cfg.palette), cfg.grid.dilation_kernel);

  const PromptSet grid_prompts = generate_grid(cfg.prompt_n, bev.height(), bev.width());
  const PromptSet prompts = cfg.prune ? prune_prompts(grid_prompts, bev, cfg.prune_radius) : grid_prompts;

  std::vector<Mask> masks;
  if (!prompts.prompts.empty()) masks = segment(seg, SegmentationRequest{bev, prompts, cfg.multimask});
  const std::size_t n_segmented = masks.size();
  if (cfg.dedup) masks = dedup_masks(masks, cfg.dedup_iou);
  masks = filter_masks(masks, cfg.thresholds);

  std::size_t dropped = 0;
  for (const Mask& m : masks) {
    const RotatedBox2D box2d = orient_long_side(min_area_rect(m));
    try {
      result.boxes.push_back(vertical_attributes(lift_box(box2d, cfg.grid, m.score), cropped, cfg.grid));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNoSupportingPoints) throw;
      ++dropped;
    }
  }

  if (trace != nullptr) {
    trace->image = bev;
    trace->prompts_total = grid_prompts.size();
    trace->prompts_kept = prompts.size();
    trace->masks_segmented = n_segmented;
    trace->masks_filtered = masks.size();
    trace->boxes_dropped = dropped;
  }
  return result;
}

}  // namespace sam3d
