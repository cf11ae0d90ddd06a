#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sam3d {

struct Point {
  float x = 0.0F;
  float y = 0.0F;
  float z = 0.0F;
  float intensity = 0.0F;

  friend bool operator==(const Point&, const Point&) = default;
};

struct PointCloud {
  std::vector<Point> points;
  std::string frame_id;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// Horizontal crop window in meters. Both ends are inclusive.
struct RangeSpec {
  double lx = -30.0;
  double ux = 30.0;
  double ly = -30.0;
  double uy = 30.0;

  void validate() const;
  bool contains(double x, double y) const { return lx <= x && x <= ux && ly <= y && y <= uy; }
};

enum class CloudFormat { kBinaryXyzi, kTextXyzi };
enum class IntensityMode { kMinmaxPerFrame, kClipUnit };

CloudFormat parse_cloud_format(const std::string& name);
// ".bin" -> binary, anything else -> text.
CloudFormat guess_cloud_format(const std::filesystem::path& path);
IntensityMode parse_intensity_mode(const std::string& name);
std::string to_string(IntensityMode mode);

/// Reads a cloud. binary_xyzi is a headerless run of little-endian
/// float32 quadruples; text_xyzi is one point per line, fields split on
/// whitespace or commas, '#' lines ignored. frame_id is the file stem.
PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);
void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

PointCloud crop_to_range(const PointCloud& cloud, const RangeSpec& range);

// Maps intensities into [0,1]. Constant-intensity frames map to 0.5 under minmax.
PointCloud normalize_intensity(const PointCloud& cloud, IntensityMode mode);

}  // namespace sam3d
