#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sam3d/box_lift.hpp"

namespace sam3d {

/// SplitMix64. Each draw advances the state by 0x9E3779B97F4A7C15 and
/// mixes it:
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31);
/// uniform() takes the top 53 bits as a double in [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

using Interval = std::pair<double, double>;

struct SceneSpec {
  std::uint64_t seed = 0;
  std::string frame_id;  // defaults to "scene_<seed>"
  int n_cars = 10;
  Interval car_length{3.5, 5.0};
  Interval car_width{1.6, 2.0};
  Interval car_height{1.4, 1.8};
  double min_gap = 1.0;           // footprint edge separation, m
  double surface_density = 50.0;  // points / m^2 on car faces and roof
  double ground_density = 0.5;    // points / m^2 at z = 0
  int clutter_count = 20;
  Interval clutter_size{0.2, 0.6};
  Interval clutter_height{0.3, 1.0};
  Interval car_intensity{0.6, 0.9};
  Interval ground_intensity{0.05, 0.2};
  Interval clutter_intensity{0.2, 0.5};
  RangeSpec range;
  double border = 0.5;  // keep objects this far inside the range
  int max_attempts = 10000;

  void validate() const;
  std::string effective_frame_id() const;
};

nlohmann::json scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(const nlohmann::json& j);

struct LabeledScene {
  PointCloud cloud;
  DetectionSet gt;
  std::vector<std::vector<std::size_t>> object_points;  // per GT box, indices into cloud
};

/// Cars are cuboids with heading in (-pi/2, pi/2] and dx = length; their
/// points cover the four vertical faces and the roof. Clutter blobs are
/// too small for the vehicle area band. Ground points lie at z = 0.
LabeledScene generate_scene(const SceneSpec& spec);

// Recovers object membership from GT boxes: a point belongs to the first
// box whose 3D extent contains it.
LabeledScene label_scene_from_boxes(const PointCloud& cloud, const DetectionSet& gt);

/// Test segmenter holding each object's dilated BEV footprint. A prompt
/// whose rounded pixel lies in footprint k yields footprint k with score
/// 1.0; anything else yields no mask.
class OracleSegmenter final : public Segmenter {
 public:
  OracleSegmenter(const LabeledScene& scene, const PipelineConfig& cfg);

  SegmenterKind kind() const override { return SegmenterKind::kOracle; }
  std::vector<Mask> run(const SegmentationRequest& req) override;

  const std::vector<Bitmap>& footprints() const { return footprints_; }

 private:
  int h_;
  int w_;
  std::vector<Bitmap> footprints_;
  std::vector<Mask> masks_;
  std::vector<int> label_;  // first footprint covering each pixel, or -1
};

SegmenterHandle make_oracle(const LabeledScene& scene, const PipelineConfig& cfg);

}  // namespace sam3d
