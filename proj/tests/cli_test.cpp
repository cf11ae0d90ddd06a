#include "sam3d/cli.hpp"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "sam3d/bev_raster.hpp"
#include "sam3d/box_lift.hpp"
#include "sam3d/metrics.hpp"
#include "sam3d/synth_scene.hpp"
#include "test_util.hpp"

namespace sam3d {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;
using testing::write_text;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Writes `count` default scenes under dir via the synth subcommand.
void synth(const fs::path& dir, int count, std::uint64_t seed = 0) {
  SceneSpec spec;
  spec.seed = seed;
  write_text(dir / "spec_in.json", scene_spec_to_json(spec).dump());
  const CliRun r = cli({"synth", "--spec", (dir / "spec_in.json").string(), "--out", dir.string(), "--count",
                     std::to_string(count)});
  ASSERT_EQ(r.code, 0) << r.err;
}

TEST(CliRasterize, WritesPngAndSidecar) {
  TempDir dir;
  synth(dir.path(), 1);
  const fs::path frame = dir / "frames" / "scene_0.bin";
  ASSERT_TRUE(fs::exists(frame));
  const CliRun r = cli({"rasterize", "-i", frame.string(), "-o", (dir / "bev.png").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const BevImage img = load_png(dir / "bev.png");
  EXPECT_EQ(img.height(), 600);
  EXPECT_EQ(img.width(), 600);
  EXPECT_GT(img.active_count(), 0U);
  EXPECT_TRUE(fs::exists(dir / "bev.json"));
}

TEST(CliRasterize, Errors) {
  TempDir dir;
  EXPECT_EQ(cli({"rasterize", "-i", (dir / "missing.bin").string(), "-o", (dir / "x.png").string()}).code, kExitIo);
  synth(dir.path(), 1);
  const std::string frame = (dir / "frames" / "scene_0.bin").string();
  EXPECT_EQ(cli({"--dilation_kernel", "4", "rasterize", "-i", frame, "-o", (dir / "x.png").string()}).code,
            kExitConfig);
  EXPECT_EQ(cli({"rasterize", "-i", frame}).code, kExitConfig);
  EXPECT_EQ(cli({"--no-such-flag", "rasterize", "-i", frame, "-o", "x.png"}).code, kExitConfig);
}

TEST(CliDetect, OracleDirectoryAndEval) {
  TempDir dir;
  synth(dir.path(), 3);
  const CliRun d = cli({"--jobs", "2", "--viz", "detect", "-i", (dir / "frames").string(), "-o", (dir / "dets").string(),
                     "--scene", (dir / "gt").string()});
  ASSERT_EQ(d.code, 0) << d.err;
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir / "dets")) n += e.path().extension() == ".json";
  EXPECT_EQ(n, 3);
  const DetectionSet first = load_detections(dir / "dets" / "scene_0.json");
  EXPECT_EQ(first.frame_id, "scene_0");
  EXPECT_EQ(first.boxes.size(), 10U);
  EXPECT_TRUE(fs::exists(dir / "dets" / "scene_0.png"));

  const CliRun e = cli({"eval", "--dets", (dir / "dets").string(), "--gt", (dir / "gt").string(), "-o",
                     (dir / "report.json").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("ap="), std::string::npos);
  const auto report = nlohmann::json::parse(read_all(dir / "report.json"));
  std::size_t in_range = 0;
  for (int i = 0; i < 3; ++i) {
    in_range += range_filter(load_detections(dir / "gt" / ("scene_" + std::to_string(i) + ".json")), 30.0).boxes.size();
  }
  EXPECT_EQ(report["fn"].get<std::size_t>() + report["tp"].get<std::size_t>(), in_range);
}

TEST(CliDetect, ExternalSegmenterWithoutAdapterTimesOut) {
  TempDir dir;
  synth(dir.path(), 1);
  fs::create_directories(dir / "endpoint");
  const CliRun r = cli({"--segmenter", "external", "--endpoint", (dir / "endpoint").string(), "--timeout_s", "0.3",
                     "--poll_ms", "20", "detect", "-i", (dir / "frames" / "scene_0.bin").string(), "-o",
                     (dir / "out.json").string()});
  EXPECT_EQ(r.code, kExitSegmenter) << r.err;
  const CliRun missing = cli({"--segmenter", "external", "--endpoint", (dir / "nope").string(), "detect", "-i",
                           (dir / "frames" / "scene_0.bin").string(), "-o", (dir / "out.json").string()});
  EXPECT_EQ(missing.code, kExitSegmenter);
}

TEST(CliEval, IdenticalEmptyAndMismatched) {
  TempDir dir;
  synth(dir.path(), 1);
  const std::string gt = (dir / "gt" / "scene_0.json").string();
  const CliRun same = cli({"eval", "--dets", gt, "--gt", gt});
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_NE(same.out.find("ap=1"), std::string::npos) << same.out;

  const DetectionSet truth = range_filter(load_detections(gt), 30.0);
  save_detections({"scene_0", {}}, dir / "empty.json");
  const CliRun empty = cli({"eval", "--dets", (dir / "empty.json").string(), "--gt", gt, "-o",
                         (dir / "r.json").string()});
  ASSERT_EQ(empty.code, 0);
  const auto report = nlohmann::json::parse(read_all(dir / "r.json"));
  EXPECT_EQ(report["fn"].get<std::size_t>(), truth.boxes.size());
  EXPECT_EQ(report["ap"].get<double>(), 0.0);

  save_detections({"other_frame", {}}, dir / "other.json");
  EXPECT_EQ(cli({"eval", "--dets", (dir / "other.json").string(), "--gt", gt}).code, kExitFrameMismatch);
}

TEST(CliSynth, DeterministicAndErrors) {
  TempDir a, b;
  synth(a.path(), 2, 5);
  synth(b.path(), 2, 5);
  for (const char* f : {"frames/scene_5.bin", "frames/scene_6.bin", "gt/scene_5.json", "gt/scene_6.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(read_all(a / f), read_all(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "spec.json"));

  TempDir c;
  write_text(c / "empty.json", R"({"n_cars": 0, "clutter_count": 0, "ground_density": 0})");
  ASSERT_EQ(cli({"synth", "--spec", (c / "empty.json").string(), "-o", c.path().string()}).code, 0);
  EXPECT_EQ(fs::file_size(c / "frames" / "scene_0.bin"), 0U);

  write_text(c / "crowded.json", R"({"n_cars": 80, "range": [-8, 8, -8, 8], "max_attempts": 100})");
  EXPECT_EQ(cli({"synth", "--spec", (c / "crowded.json").string(), "-o", (c / "x").string()}).code, kExitPlacement);
  write_text(c / "bad.json", R"({"cars": 3})");
  EXPECT_EQ(cli({"synth", "--spec", (c / "bad.json").string(), "-o", (c / "y").string()}).code, kExitConfig);
}

TEST(CliConfig, PrintConfigMatchesGolden) {
  const CliRun r = cli({"--print-config"});
  ASSERT_EQ(r.code, 0);
  const auto golden = nlohmann::json::parse(read_all(fs::path(SAM3D_GOLDEN_DIR) / "default_config.json"));
  EXPECT_EQ(nlohmann::json::parse(r.out), golden);
}

TEST(CliConfig, FileAndFlagOverrides) {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"area_lo": 150, "prompt_n": 16})");
  const CliRun r = cli({"--config", (dir / "cfg.json").string(), "--prompt-n", "24", "--print-config"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["area_lo"], 150.0);
  EXPECT_EQ(j["prompt_n"], 24);

  write_text(dir / "bad.json", R"({"area_low": 150})");
  EXPECT_EQ(cli({"--config", (dir / "bad.json").string(), "--print-config"}).code, kExitConfig);
  write_text(dir / "inverted.json", R"({"area_lo": 9000})");
  EXPECT_EQ(cli({"--config", (dir / "inverted.json").string(), "--print-config"}).code, kExitConfig);
}

}  // namespace
}  // namespace sam3d
