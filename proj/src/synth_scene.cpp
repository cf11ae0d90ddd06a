#include "sam3d/synth_scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sam3d/error.hpp"

namespace sam3d {

namespace {

constexpr double kPi = std::numbers::pi;

struct Cuboid {
  double cx, cy, length, width, height, theta;

  RotatedBox2D footprint() const { return {cx, cy, length, width, theta}; }
};

class SceneBuilder {
 public:
  SceneBuilder(const SceneSpec& spec, LabeledScene& scene) : spec_(spec), rng_(spec.seed), scene_(scene) {}

  double uniform(const Interval& iv) { return rng_.uniform(iv.first, iv.second); }
  double uniform() { return rng_.uniform(); }

  // Heading uniform in (-pi/2, pi/2].
  double heading() { return kPi / 2 - kPi * rng_.uniform(); }

  bool fits(const RotatedBox2D& fp, const std::vector<RotatedBox2D>& others) const {
    const RangeSpec& r = spec_.range;
    for (const Vec2& c : box_corners(fp)) {
      if (c.u < r.lx + spec_.border || c.u > r.ux - spec_.border || c.v < r.ly + spec_.border ||
          c.v > r.uy - spec_.border) {
        return false;
      }
    }
    return std::all_of(others.begin(), others.end(),
                       [&](const RotatedBox2D& o) { return rect_distance(fp, o) >= spec_.min_gap; });
  }

  Cuboid place(Interval length, Interval width, Interval height, const std::vector<RotatedBox2D>& others,
               const char* what) {
    const RangeSpec& r = spec_.range;
    for (int attempt = 0; attempt < spec_.max_attempts; ++attempt) {
      Cuboid c{};
      c.length = uniform(length);
      c.width = uniform(width);
      c.height = uniform(height);
      c.theta = heading();
      c.cx = rng_.uniform(r.lx, r.ux);
      c.cy = rng_.uniform(r.ly, r.uy);
      if (fits(c.footprint(), others)) return c;
    }
    throw Error(ErrorKind::kPlacementFailure, std::string("could not place ") + what + " within " +
                                                  std::to_string(spec_.max_attempts) + " attempts");
  }

  void emit(double cx, double cy, double theta, double along, double across, double z, Interval intensity) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    scene_.cloud.points.push_back({static_cast<float>(cx + along * c - across * s),
                                   static_cast<float>(cy + along * s + across * c), static_cast<float>(z),
                                   static_cast<float>(uniform(intensity))});
  }

  std::size_t count(double area, double density) { return static_cast<std::size_t>(std::lround(area * density)); }

  // Four vertical faces and the roof.
  void surface_points(const Cuboid& b, Interval intensity) {
    const double hl = b.length / 2;
    const double hw = b.width / 2;
    const double d = spec_.surface_density;
    for (double side : {-1.0, 1.0}) {
      for (std::size_t i = count(b.width * b.height, d); i-- > 0;) {
        const double across = rng_.uniform(-hw, hw);
        emit(b.cx, b.cy, b.theta, side * hl, across, rng_.uniform(0.0, b.height), intensity);
      }
      for (std::size_t i = count(b.length * b.height, d); i-- > 0;) {
        const double along = rng_.uniform(-hl, hl);
        emit(b.cx, b.cy, b.theta, along, side * hw, rng_.uniform(0.0, b.height), intensity);
      }
    }
    for (std::size_t i = count(b.length * b.width, d); i-- > 0;) {
      const double along = rng_.uniform(-hl, hl);
      const double across = rng_.uniform(-hw, hw);
      emit(b.cx, b.cy, b.theta, along, across, b.height, intensity);
    }
  }

 private:
  const SceneSpec& spec_;
  SplitMix64 rng_;
  LabeledScene& scene_;
};

nlohmann::json interval_json(const Interval& iv) { return {iv.first, iv.second}; }

Interval interval_from(const nlohmann::json& j, const char* key, Interval fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

void check_interval(const Interval& iv, const char* name, bool positive) {
  if (!(iv.first <= iv.second) || (positive && !(iv.first > 0.0))) {
    throw Error(ErrorKind::kConfigError, std::string("invalid interval for ") + name);
  }
}

}  // namespace

void SceneSpec::validate() const {
  range.validate();
  if (n_cars < 0 || clutter_count < 0) throw Error(ErrorKind::kConfigError, "object counts must be >= 0");
  if (!(surface_density > 0.0) || ground_density < 0.0) {
    throw Error(ErrorKind::kConfigError, "surface density must be > 0 and ground density >= 0");
  }
  if (min_gap < 0.0 || border < 0.0) throw Error(ErrorKind::kConfigError, "min_gap and border must be >= 0");
  if (max_attempts < 1) throw Error(ErrorKind::kConfigError, "max_attempts must be >= 1");
  check_interval(car_length, "car_length", true);
  check_interval(car_width, "car_width", true);
  check_interval(car_height, "car_height", true);
  check_interval(clutter_size, "clutter_size", true);
  check_interval(clutter_height, "clutter_height", true);
  check_interval(car_intensity, "car_intensity", false);
  check_interval(ground_intensity, "ground_intensity", false);
  check_interval(clutter_intensity, "clutter_intensity", false);
}

std::string SceneSpec::effective_frame_id() const {
  return frame_id.empty() ? "scene_" + std::to_string(seed) : frame_id;
}

nlohmann::json scene_spec_to_json(const SceneSpec& s) {
  return {{"seed", s.seed},
          {"frame_id", s.frame_id},
          {"n_cars", s.n_cars},
          {"car_length", interval_json(s.car_length)},
          {"car_width", interval_json(s.car_width)},
          {"car_height", interval_json(s.car_height)},
          {"min_gap", s.min_gap},
          {"surface_density", s.surface_density},
          {"ground_density", s.ground_density},
          {"clutter_count", s.clutter_count},
          {"clutter_size", interval_json(s.clutter_size)},
          {"clutter_height", interval_json(s.clutter_height)},
          {"car_intensity", interval_json(s.car_intensity)},
          {"ground_intensity", interval_json(s.ground_intensity)},
          {"clutter_intensity", interval_json(s.clutter_intensity)},
          {"range", {s.range.lx, s.range.ux, s.range.ly, s.range.uy}},
          {"border", s.border},
          {"max_attempts", s.max_attempts}};
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kConfigError, "scene spec must be a JSON object");
  const nlohmann::json known = scene_spec_to_json(SceneSpec{});
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::kConfigError, "unknown scene spec key: " + key);
  }
  try {
    SceneSpec s;
    s.seed = j.value("seed", s.seed);
    s.frame_id = j.value("frame_id", s.frame_id);
    s.n_cars = j.value("n_cars", s.n_cars);
    s.car_length = interval_from(j, "car_length", s.car_length);
    s.car_width = interval_from(j, "car_width", s.car_width);
    s.car_height = interval_from(j, "car_height", s.car_height);
    s.min_gap = j.value("min_gap", s.min_gap);
    s.surface_density = j.value("surface_density", s.surface_density);
    s.ground_density = j.value("ground_density", s.ground_density);
    s.clutter_count = j.value("clutter_count", s.clutter_count);
    s.clutter_size = interval_from(j, "clutter_size", s.clutter_size);
    s.clutter_height = interval_from(j, "clutter_height", s.clutter_height);
    s.car_intensity = interval_from(j, "car_intensity", s.car_intensity);
    s.ground_intensity = interval_from(j, "ground_intensity", s.ground_intensity);
    s.clutter_intensity = interval_from(j, "clutter_intensity", s.clutter_intensity);
    if (j.contains("range")) {
      const auto& r = j.at("range");
      s.range = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
    }
    s.border = j.value("border", s.border);
    s.max_attempts = j.value("max_attempts", s.max_attempts);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("scene spec: ") + e.what());
  }
}

LabeledScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  LabeledScene scene;
  scene.cloud.frame_id = spec.effective_frame_id();
  scene.gt.frame_id = scene.cloud.frame_id;
  SceneBuilder builder(spec, scene);

  std::vector<RotatedBox2D> occupied;
  for (int k = 0; k < spec.n_cars; ++k) {
    const Cuboid car = builder.place(spec.car_length, spec.car_width, spec.car_height, occupied, "car");
    occupied.push_back(car.footprint());
    const std::size_t first = scene.cloud.points.size();
    builder.surface_points(car, spec.car_intensity);
    std::vector<std::size_t> idx(scene.cloud.points.size() - first);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = first + i;
    scene.object_points.push_back(std::move(idx));
    scene.gt.boxes.push_back({car.cx, car.cy, car.height / 2, car.length, car.width, car.height, car.theta, 1.0});
  }
  for (int k = 0; k < spec.clutter_count; ++k) {
    const Cuboid blob = builder.place(spec.clutter_size, spec.clutter_size, spec.clutter_height, occupied, "clutter");
    occupied.push_back(blob.footprint());
    builder.surface_points(blob, spec.clutter_intensity);
  }
  const RangeSpec& r = spec.range;
  const std::size_t n_ground = builder.count((r.ux - r.lx) * (r.uy - r.ly), spec.ground_density);
  for (std::size_t i = 0; i < n_ground; ++i) {
    const double x = builder.uniform({r.lx, r.ux});
    const double y = builder.uniform({r.ly, r.uy});
    scene.cloud.points.push_back({static_cast<float>(x), static_cast<float>(y), 0.0F,
                                  static_cast<float>(builder.uniform(spec.ground_intensity))});
  }
  return scene;
}

LabeledScene label_scene_from_boxes(const PointCloud& cloud, const DetectionSet& gt) {
  constexpr double kSlack = 1e-4;
  LabeledScene scene;
  scene.cloud = cloud;
  scene.gt = gt;
  scene.object_points.resize(gt.boxes.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point& p = cloud.points[i];
    for (std::size_t k = 0; k < gt.boxes.size(); ++k) {
      const Box3D& b = gt.boxes[k];
      RotatedBox2D fp = b.footprint();
      fp.dx += 2 * kSlack;
      fp.dy += 2 * kSlack;
      if (std::abs(p.z - b.z) <= b.dz / 2 + kSlack && point_in_rotated_rect({p.x, p.y}, fp)) {
        scene.object_points[k].push_back(i);
        break;
      }
    }
  }
  return scene;
}

OracleSegmenter::OracleSegmenter(const LabeledScene& scene, const PipelineConfig& cfg)
    : h_(cfg.grid.height()), w_(cfg.grid.width()), label_(static_cast<std::size_t>(h_) * w_, -1) {
  cfg.grid.validate();
  const Rgb on{255, 255, 255};
  for (const auto& indices : scene.object_points) {
    BevImage occupancy(h_, w_, cfg.grid);
    for (std::size_t i : indices) {
      const Point& p = scene.cloud.points[i];
      if (!cfg.grid.range.contains(p.x, p.y)) continue;
      const PixelIndex px = project_point(p, cfg.grid);
      occupancy.set(px.row, px.col, on);
    }
    const BevImage grown = dilate(occupancy, cfg.grid.dilation_kernel);
    Bitmap fp(h_, w_);
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) {
        if (!grown.active(r, c)) continue;
        fp.set(r, c);
        int& slot = label_[static_cast<std::size_t>(r) * w_ + c];
        if (slot < 0) slot = static_cast<int>(footprints_.size());
      }
    }
    masks_.push_back(Mask::from_bitmap(fp, 1.0, -1));
    footprints_.push_back(std::move(fp));
  }
}

std::vector<Mask> OracleSegmenter::run(const SegmentationRequest& req) {
  if (req.image.height() != h_ || req.image.width() != w_) {
    throw Error(ErrorKind::kBadArgs, "oracle built for a different grid");
  }
  std::vector<Mask> out;
  for (std::size_t i = 0; i < req.prompts.prompts.size(); ++i) {
    const PixelIndex px = prompt_pixel(req.prompts.prompts[i], h_, w_);
    const int k = label_[static_cast<std::size_t>(px.row) * w_ + px.col];
    if (k < 0) continue;
    Mask m = masks_[static_cast<std::size_t>(k)];
    m.prompt_index = static_cast<int>(i);
    out.push_back(std::move(m));
  }
  return out;
}

SegmenterHandle make_oracle(const LabeledScene& scene, const PipelineConfig& cfg) {
  return std::make_shared<OracleSegmenter>(scene, cfg);
}

}  // namespace sam3d
