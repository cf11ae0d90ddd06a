#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sam3d/bev_raster.hpp"
#include "sam3d/geometry.hpp"
#include "sam3d/mask_filter.hpp"
#include "sam3d/pointcloud_io.hpp"
#include "sam3d/segmenter.hpp"

namespace sam3d {

// 7-DoF box in meters/radians plus a confidence.
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double theta = 0.0;
  double score = 1.0;

  RotatedBox2D footprint() const { return {x, y, dx, dy, theta}; }
  friend bool operator==(const Box3D&, const Box3D&) = default;
};

struct DetectionSet {
  std::string frame_id;
  std::vector<Box3D> boxes;
  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

nlohmann::json detections_to_json(const DetectionSet& set);
DetectionSet detections_from_json(const nlohmann::json& j);
DetectionSet load_detections(const std::filesystem::path& path);
void save_detections(const DetectionSet& set, const std::filesystem::path& path);

struct PipelineConfig {
  GridConfig grid;
  Palette palette = Palette::default_ramp();
  IntensityMode intensity_mode = IntensityMode::kMinmaxPerFrame;
  int prompt_n = 32;
  bool prune = true;
  int prune_radius = 3;
  bool multimask = true;
  bool dedup = true;
  double dedup_iou = 0.8;
  FilterThresholds thresholds;

  void validate() const;
};

/// Horizontal attributes from a pixel-space box:
///   x = ux - (cx + 0.5) * sx,  y = uy - (cy + 0.5) * sy,
///   dx = dx2d * sx,  dy = dy2d * sy,  theta = theta2d.
/// z and dz are left at zero.
Box3D lift_box(const RotatedBox2D& box, const GridConfig& grid, double score);

// Inverse of lift_box's horizontal mapping.
RotatedBox2D box_to_pixels(const Box3D& box, const GridConfig& grid);

/// Fills z and dz from the points whose BEV position falls inside the box
/// footprint: dz = max(z) - min(z), z = min(z) + dz / 2. Throws
/// NoSupportingPoints when no point falls inside.
Box3D vertical_attributes(const Box3D& box, const PointCloud& cloud, const GridConfig& grid);

// Per-frame counters, filled when requested.
struct FrameTrace {
  BevImage image;  // dilated BEV as sent to the segmenter
  std::size_t prompts_total = 0;
  std::size_t prompts_kept = 0;
  std::size_t masks_segmented = 0;
  std::size_t masks_filtered = 0;
  std::size_t boxes_dropped = 0;
};

/// crop -> normalize -> rasterize -> dilate -> prompts -> prune -> segment
/// -> (dedup) -> filter -> min-area rect -> lift -> vertical attributes.
/// Box scores are the source mask scores; order follows mask order.
DetectionSet detect_frame(const PointCloud& cloud, const PipelineConfig& cfg, Segmenter& seg,
                          FrameTrace* trace = nullptr);

}  // namespace sam3d
