#include "sam3d/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "sam3d/config.hpp"
#include "sam3d/error.hpp"
#include "sam3d/metrics.hpp"
#include "sam3d/synth_scene.hpp"

namespace sam3d {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigError:
    case ErrorKind::kBadKernel:
    case ErrorKind::kBadArgs:
    case ErrorKind::kDomainError:
      return kExitConfig;
    case ErrorKind::kSegmenterUnavailable:
    case ErrorKind::kTimeout:
    case ErrorKind::kProtocolError:
      return kExitSegmenter;
    case ErrorKind::kPlacementFailure:
      return kExitPlacement;
    default:
      return kExitIo;
  }
}

bool is_cloud_file(const fs::path& p) {
  const auto ext = p.extension();
  return ext == ".bin" || ext == ".txt" || ext == ".xyzi";
}

std::vector<fs::path> list_files(const fs::path& dir, bool (*keep)(const fs::path&)) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && keep(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void draw_line(BevImage& img, Vec2 a, Vec2 b, const Rgb& color) {
  const double steps = std::ceil(std::max(std::abs(b.u - a.u), std::abs(b.v - a.v))) + 1.0;
  for (double s = 0; s <= steps; ++s) {
    const Vec2 p = a + (s / steps) * (b - a);
    const auto r = static_cast<int>(std::floor(p.u));
    const auto c = static_cast<int>(std::floor(p.v));
    if (r >= 0 && r < img.height() && c >= 0 && c < img.width()) img.set(r, c, color);
  }
}

void burn_boxes(BevImage& img, const DetectionSet& dets, const GridConfig& grid) {
  for (const Box3D& b : dets.boxes) {
    RotatedBox2D px = box_to_pixels(b, grid);
    px.cx += 0.5;  // continuous pixel space
    px.cy += 0.5;
    const auto corners = box_corners(px);
    for (std::size_t i = 0; i < 4; ++i) draw_line(img, corners[i], corners[(i + 1) % 4], {255, 255, 255});
  }
}

struct Shared {
  std::string config_path;
  bool print_config = false;
  int jobs = 1;
  bool viz = false;
  std::map<std::string, std::string> overrides;
};

RunConfig resolve_config(const Shared& shared) {
  RunConfig base;
  if (!shared.config_path.empty()) base = load_config(shared.config_path);
  nlohmann::ordered_json flat = config_to_json(base);
  for (const auto& [key, value] : shared.overrides) apply_override(flat, key, value);
  return config_from_json(flat, base);
}

int cmd_rasterize(const RunConfig& cfg, const fs::path& input, const fs::path& output, const std::string& format) {
  const CloudFormat fmt = format.empty() ? guess_cloud_format(input) : parse_cloud_format(format);
  const PipelineConfig& p = cfg.pipeline;
  const PointCloud cloud = crop_to_range(load_point_cloud(input, fmt), p.grid.range);
  const PointCloud norm = cloud.empty() ? cloud : normalize_intensity(cloud, p.intensity_mode);
  const BevImage img = dilate(rasterize(norm, p.grid, p.palette), p.grid.dilation_kernel);
  save_png(img, output);
  fs::path sidecar = output;
  sidecar.replace_extension(".json");
  save_grid_sidecar(p.grid, sidecar);
  return kExitOk;
}

SegmenterHandle make_segmenter(const RunConfig& cfg, const PointCloud& cloud, const fs::path& scene) {
  if (cfg.segmenter == "external") {
    if (cfg.endpoint.empty()) throw Error(ErrorKind::kConfigError, "external segmenter needs --endpoint");
    ExternalOptions opts;
    opts.endpoint = cfg.endpoint;
    opts.timeout = std::chrono::milliseconds(static_cast<long>(cfg.timeout_s * 1000.0));
    opts.poll = std::chrono::milliseconds(cfg.poll_ms);
    return std::make_shared<ExternalSegmenter>(opts);
  }
  if (scene.empty()) throw Error(ErrorKind::kConfigError, "oracle segmenter needs --scene");
  const fs::path gt_path = fs::is_directory(scene) ? scene / (cloud.frame_id + ".json") : scene;
  return make_oracle(label_scene_from_boxes(cloud, load_detections(gt_path)), cfg.pipeline);
}

int cmd_detect(const RunConfig& cfg, const Shared& shared, const fs::path& input, const fs::path& output,
               const fs::path& scene, std::ostream& err) {
  std::vector<fs::path> frames;
  const bool dir_input = fs::is_directory(input);
  if (dir_input) {
    frames = list_files(input, is_cloud_file);
  } else {
    if (!fs::is_regular_file(input)) throw Error(ErrorKind::kIoFailure, "no such input: " + input.string());
    frames.push_back(input);
  }
  const bool single_file_out = !dir_input && output.extension() == ".json";
  const fs::path out_dir = single_file_out ? output.parent_path() : output;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::kIoFailure, "cannot create " + out_dir.string());
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  int status = kExitOk;
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      {
        std::lock_guard lock(mu);
        if (status != kExitOk) return;
      }
      try {
        const PointCloud cloud = load_point_cloud(frames[i], guess_cloud_format(frames[i]));
        const SegmenterHandle seg = make_segmenter(cfg, cloud, scene);
        FrameTrace trace;
        const DetectionSet dets = detect_frame(cloud, cfg.pipeline, *seg, &trace);
        const fs::path target = single_file_out ? output : out_dir / (cloud.frame_id + ".json");
        save_detections(dets, target);
        if (shared.viz) {
          BevImage img = trace.image;
          burn_boxes(img, dets, cfg.pipeline.grid);
          fs::path png = target;
          png.replace_extension(".png");
          save_png(img, png);
        }
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        err << frames[i].string() << ": " << e.what() << '\n';
        if (status == kExitOk) status = exit_code_for(e.kind());
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(shared.jobs, static_cast<int>(frames.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return status;
}

int cmd_eval(const RunConfig& cfg, const fs::path& dets_path, const fs::path& gt_path, const fs::path& report_path,
             std::ostream& out, std::ostream& err) {
  std::vector<std::pair<DetectionSet, DetectionSet>> frames;
  const bool dets_dir = fs::is_directory(dets_path);
  const bool gt_dir = fs::is_directory(gt_path);
  if (dets_dir != gt_dir) throw Error(ErrorKind::kIoFailure, "dets and gt must both be files or both directories");
  if (dets_dir) {
    auto is_json = [](const fs::path& p) { return p.extension() == ".json"; };
    std::map<std::string, DetectionSet> dets, gts;
    for (const auto& p : list_files(dets_path, is_json)) {
      DetectionSet d = load_detections(p);
      dets.emplace(d.frame_id, std::move(d));
    }
    for (const auto& p : list_files(gt_path, is_json)) {
      DetectionSet g = load_detections(p);
      gts.emplace(g.frame_id, std::move(g));
    }
    for (auto& [id, g] : gts) {
      auto it = dets.find(id);
      if (it == dets.end()) {
        err << "frame '" << id << "' has ground truth but no detections\n";
        return kExitFrameMismatch;
      }
      frames.emplace_back(std::move(it->second), std::move(g));
      dets.erase(it);
    }
    if (!dets.empty()) {
      err << "frame '" << dets.begin()->first << "' has detections but no ground truth\n";
      return kExitFrameMismatch;
    }
  } else {
    DetectionSet d = load_detections(dets_path);
    DetectionSet g = load_detections(gt_path);
    if (d.frame_id != g.frame_id) {
      err << "frame id mismatch: '" << d.frame_id << "' vs '" << g.frame_id << "'\n";
      return kExitFrameMismatch;
    }
    frames.emplace_back(std::move(d), std::move(g));
  }

  EvalAccumulator acc(cfg.eval.iou_thr);
  for (const auto& [d, g] : frames) {
    acc.add_frame(range_filter(d, cfg.eval.max_dist), range_filter(g, cfg.eval.max_dist));
  }
  const EvalReport report = acc.report();
  const auto j = report_to_json(report);
  out << "ap=" << report.ap << " aph=" << report.aph << " tp=" << report.tp << " fp=" << report.fp
      << " fn=" << report.fn << '\n';
  if (report.no_ground_truth) err << "warning: no ground truth boxes in range\n";
  if (!report_path.empty()) write_file_atomic(report_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, int count) {
  SceneSpec base;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + spec_path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kConfigError, spec_path.string() + ": " + e.what());
    }
    base = scene_spec_from_json(j);
  }
  if (count < 1) throw Error(ErrorKind::kConfigError, "--count must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir / "frames", ec);
  fs::create_directories(out_dir / "gt", ec);
  if (ec) throw Error(ErrorKind::kIoFailure, "cannot create " + out_dir.string());
  write_file_atomic(out_dir / "spec.json", scene_spec_to_json(base).dump(2) + "\n");
  for (int i = 0; i < count; ++i) {
    SceneSpec spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(i);
    if (!base.frame_id.empty() && count > 1) spec.frame_id = base.frame_id + "_" + std::to_string(i);
    const LabeledScene scene = generate_scene(spec);
    save_point_cloud(scene.cloud, out_dir / "frames" / (scene.cloud.frame_id + ".bin"), CloudFormat::kBinaryXyzi);
    save_detections(scene.gt, out_dir / "gt" / (scene.gt.frame_id + ".json"));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR BEV zero-shot vehicle detection", "sam3d"};
  app.fallthrough();
  Shared shared;
  app.add_option("--config", shared.config_path, "Flat JSON config file");
  app.add_flag("--print-config", shared.print_config, "Print the effective config and exit");
  app.add_option("--jobs", shared.jobs, "Frames processed in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--viz", shared.viz, "Also write BEV PNGs with detection outlines");

  // Every config key is also a flag, e.g. --area_lo 150 or --area-lo 150.
  const nlohmann::ordered_json defaults = config_to_json(RunConfig{});
  for (const auto& item : defaults.items()) {
    const std::string key = item.key();
    std::string name = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) name += ",--" + dashed;
    app.add_option_function<std::string>(
        name, [&shared, key](const std::string& v) { shared.overrides[key] = v; }, "Override config key " + key);
  }

  fs::path input, output, scene, dets_path, gt_path, report_path, spec_path, out_dir;
  std::string format;
  int count = 1;

  auto* rasterize_cmd = app.add_subcommand("rasterize", "Point cloud to BEV PNG plus grid sidecar");
  rasterize_cmd->add_option("--input,-i", input, "Point cloud file")->required();
  rasterize_cmd->add_option("--output,-o", output, "Output PNG")->required();
  rasterize_cmd->add_option("--format", format, "binary_xyzi | text_xyzi (default: by extension)");

  auto* detect_cmd = app.add_subcommand("detect", "Detect vehicles in one frame or a directory of frames");
  detect_cmd->add_option("--input,-i", input, "Point cloud file or directory")->required();
  detect_cmd->add_option("--output,-o", output, "Output directory (or .json file for a single frame)")->required();
  detect_cmd->add_option("--scene", scene, "Ground-truth JSON (or directory) backing the oracle segmenter");

  auto* eval_cmd = app.add_subcommand("eval", "AP / APH of detections against ground truth");
  eval_cmd->add_option("--dets", dets_path, "Detection JSON file or directory")->required();
  eval_cmd->add_option("--gt", gt_path, "Ground-truth JSON file or directory")->required();
  eval_cmd->add_option("--report,-o", report_path, "Write the report JSON here");

  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic labeled scenes");
  synth_cmd->add_option("--spec", spec_path, "Scene spec JSON (default spec when omitted)");
  synth_cmd->add_option("--out,-o", out_dir, "Output directory")->required();
  synth_cmd->add_option("--count", count, "Number of scenes (seeds seed..seed+count-1)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const RunConfig cfg = resolve_config(shared);
    if (shared.print_config) {
      out << config_to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    if (*rasterize_cmd) return cmd_rasterize(cfg, input, output, format);
    if (*detect_cmd) return cmd_detect(cfg, shared, input, output, scene, err);
    if (*eval_cmd) return cmd_eval(cfg, dets_path, gt_path, report_path, out, err);
    if (*synth_cmd) return cmd_synth(spec_path, out_dir, count);
    err << app.help();
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace sam3d
