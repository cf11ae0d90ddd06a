#include "sam3d/bev_raster.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "sam3d/box_lift.hpp"
#include "test_util.hpp"

namespace sam3d {
namespace {

using testing::TempDir;

const Rgb kBlack{0, 0, 0};

TEST(GridConfig, DefaultIs600Square) {
  const GridConfig g;
  EXPECT_EQ(g.height(), 600);
  EXPECT_EQ(g.width(), 600);
}

TEST(GridConfig, RejectsBadValues) {
  GridConfig g;
  g.sx = 0.07;  // 60 / 0.07 is not integral
  EXPECT_SAM3D_ERROR(g.validate(), ErrorKind::kConfigError);
  g = GridConfig{};
  g.dilation_kernel = 4;
  EXPECT_SAM3D_ERROR(g.validate(), ErrorKind::kConfigError);
  g = GridConfig{};
  g.sy = -0.1;
  EXPECT_SAM3D_ERROR(g.validate(), ErrorKind::kConfigError);
}

TEST(ProjectPoint, Examples) {
  const GridConfig g;
  EXPECT_EQ(project_point({29.95F, 29.95F, 0, 0}, g), (PixelIndex{0, 0}));
  EXPECT_EQ(project_point({0, 0, 0, 0}, g), (PixelIndex{300, 300}));
  EXPECT_EQ(project_point({-30, -30, 0, 0}, g), (PixelIndex{599, 599}));
  EXPECT_SAM3D_ERROR(project_point({30.5F, 0, 0, 0}, g), ErrorKind::kOutOfRange);
}

TEST(ProjectPoint, InBoundsFuzz) {
  GridConfig g;
  g.range = {-20, 40, -10, 10};
  g.sx = 0.2;
  g.sy = 0.05;
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> ux(-20.0F, 40.0F), uy(-10.0F, 10.0F);
  for (int i = 0; i < 20000; ++i) {
    const PixelIndex px = project_point({ux(rng), uy(rng), 0, 0}, g);
    ASSERT_GE(px.row, 0);
    ASSERT_LT(px.row, g.height());
    ASSERT_GE(px.col, 0);
    ASSERT_LT(px.col, g.width());
  }
}

TEST(ProjectPoint, CellCenterRoundTripThroughLift) {
  const GridConfig g;
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> cell(0, 599);
  for (int i = 0; i < 1000; ++i) {
    const int r = cell(rng), c = cell(rng);
    // Metric center of cell (r, c).
    const double x = g.range.ux - (r + 0.5) * g.sx;
    const double y = g.range.uy - (c + 0.5) * g.sy;
    const PixelIndex px = project_point({static_cast<float>(x), static_cast<float>(y), 0, 0}, g);
    ASSERT_EQ(px, (PixelIndex{r, c}));
    const Box3D b = lift_box({static_cast<double>(px.row), static_cast<double>(px.col), 1, 1, 0}, g, 1.0);
    EXPECT_LE(std::abs(b.x - x), g.sx / 2);
    EXPECT_LE(std::abs(b.y - y), g.sy / 2);
  }
}

TEST(Palette, DefaultRampEndpointsAndMidpoint) {
  const Palette p = Palette::default_ramp();
  EXPECT_EQ(palette_lookup(0.0, p), (Rgb{0, 0, 255}));
  EXPECT_EQ(palette_lookup(1.0, p), (Rgb{255, 0, 0}));
  // HSV hue 240 * 127/255 = 119.53 deg -> (2, 255, 0); frozen from an
  // independent evaluation (Python colorsys.hsv_to_rgb).
  EXPECT_EQ(palette_lookup(0.5, p), (Rgb{2, 255, 0}));
  EXPECT_EQ(p[64], (Rgb{0, 255, 254}));
  EXPECT_EQ(p[192], (Rgb{255, 252, 0}));
  for (const Rgb& c : p.entries()) EXPECT_NE(c, kBlack);
}

TEST(Palette, LookupDomain) {
  const Palette p = Palette::default_ramp();
  EXPECT_SAM3D_ERROR(palette_lookup(-0.01, p), ErrorKind::kDomainError);
  EXPECT_SAM3D_ERROR(palette_lookup(1.01, p), ErrorKind::kDomainError);
}

TEST(Palette, Invariants) {
  EXPECT_SAM3D_ERROR(Palette(std::vector<Rgb>(255, Rgb{1, 1, 1})), ErrorKind::kConfigError);
  std::vector<Rgb> entries(256, Rgb{1, 1, 1});
  entries[0] = kBlack;
  EXPECT_SAM3D_ERROR(Palette{entries}, ErrorKind::kConfigError);
}

TEST(Palette, FileRoundTrip) {
  TempDir dir;
  const Palette p = Palette::default_ramp();
  p.save(dir / "palette.json");
  EXPECT_EQ(Palette::load(dir / "palette.json"), p);
  testing::write_text(dir / "bad.json", "[[1,2,3]]");
  EXPECT_SAM3D_ERROR(Palette::load(dir / "bad.json"), ErrorKind::kConfigError);
}

TEST(Rasterize, EmptyCloudIsAllBlack) {
  const BevImage img = rasterize(PointCloud{}, GridConfig{}, Palette::default_ramp());
  EXPECT_EQ(img.height(), 600);
  EXPECT_EQ(img.width(), 600);
  EXPECT_EQ(img.active_count(), 0U);
}

TEST(Rasterize, SinglePoint) {
  PointCloud c;
  c.points.push_back({0, 0, 0, 1.0F});
  const BevImage img = rasterize(c, GridConfig{}, Palette::default_ramp());
  EXPECT_EQ(img.active_count(), 1U);
  EXPECT_EQ(img.at(300, 300), (Rgb{255, 0, 0}));
}

TEST(Rasterize, MaxIntensityWinsCell) {
  const Palette p = Palette::default_ramp();
  PointCloud c;
  c.points = {{0.01F, 0.01F, 0, 0.75F}, {0.02F, 0.03F, 1, 0.2F}};
  EXPECT_EQ(rasterize(c, GridConfig{}, p).at(299, 299), palette_lookup(0.75, p));
  std::swap(c.points[0], c.points[1]);
  EXPECT_EQ(rasterize(c, GridConfig{}, p).at(299, 299), palette_lookup(0.75, p));
}

TEST(Rasterize, RejectsUnnormalized) {
  PointCloud c;
  c.points.push_back({0, 0, 0, 1.5F});
  EXPECT_SAM3D_ERROR(rasterize(c, GridConfig{}, Palette::default_ramp()), ErrorKind::kNotNormalized);
}

TEST(Rasterize, OrderIndependent) {
  GridConfig g;
  g.range = {-3, 3, -3, 3};
  std::mt19937 rng(21);
  std::uniform_real_distribution<float> coord(-3.0F, 3.0F);
  std::uniform_int_distribution<int> level(0, 3);  // coarse levels force intensity ties
  PointCloud c;
  for (int i = 0; i < 5000; ++i) {
    c.points.push_back({coord(rng), coord(rng), coord(rng), static_cast<float>(level(rng)) / 3.0F});
  }
  const Palette p = Palette::default_ramp();
  const BevImage ref = rasterize(c, g, p);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(c.points.begin(), c.points.end(), rng);
    ASSERT_EQ(rasterize(c, g, p), ref);
  }
}

BevImage random_image(std::mt19937& rng, int h, int w, double fill) {
  BevImage img(h, w);
  std::bernoulli_distribution on(fill);
  std::uniform_int_distribution<int> ch(0, 255);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (on(rng)) {
        img.set(r, c, {static_cast<std::uint8_t>(ch(rng)), static_cast<std::uint8_t>(ch(rng)),
                       static_cast<std::uint8_t>(ch(rng))});
      }
    }
  }
  return img;
}

TEST(Dilate, BlackIsFixedPoint) {
  const BevImage img(40, 30);
  EXPECT_EQ(dilate(img, 3), img);
}

TEST(Dilate, SingleSeedGrowsToKernelBlock) {
  BevImage img(600, 600);
  img.set(300, 300, {255, 0, 0});
  const BevImage out = dilate(img, 3);
  EXPECT_EQ(out.active_count(), 9U);
  for (int r = 299; r <= 301; ++r) {
    for (int c = 299; c <= 301; ++c) EXPECT_EQ(out.at(r, c), (Rgb{255, 0, 0}));
  }
}

TEST(Dilate, KernelOneIsIdentity) {
  std::mt19937 rng(1);
  const BevImage img = random_image(rng, 16, 16, 0.3);
  EXPECT_EQ(dilate(img, 1), img);
}

TEST(Dilate, BadKernel) {
  const BevImage img(4, 4);
  EXPECT_SAM3D_ERROR(dilate(img, 2), ErrorKind::kBadKernel);
  EXPECT_SAM3D_ERROR(dilate(img, 0), ErrorKind::kBadKernel);
  EXPECT_SAM3D_ERROR(dilate(img, -3), ErrorKind::kBadKernel);
}

TEST(Dilate, MatchesBruteForceWindowMax) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const BevImage img = random_image(rng, 16, 16, 0.15);
    for (int k : {3, 5, 7}) {
      const BevImage out = dilate(img, k);
      const int rad = k / 2;
      for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
          Rgb m{0, 0, 0};
          for (int rr = r - rad; rr <= r + rad; ++rr) {
            for (int cc = c - rad; cc <= c + rad; ++cc) {
              if (rr < 0 || rr >= 16 || cc < 0 || cc >= 16) continue;
              for (int ch = 0; ch < 3; ++ch) m[ch] = std::max(m[ch], img.at(rr, cc)[ch]);
            }
          }
          ASSERT_EQ(out.at(r, c), m) << "k=" << k << " at " << r << "," << c;
        }
      }
    }
  }
}

TEST(Dilate, MonotoneAndExtensive) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const BevImage img = random_image(rng, 20, 25, 0.05);
    const BevImage out = dilate(img, 3);
    EXPECT_GE(out.active_count(), img.active_count());
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 25; ++c) {
        if (img.active(r, c)) ASSERT_TRUE(out.active(r, c));
      }
    }
  }
}

TEST(Png, RoundTripAndSidecar) {
  TempDir dir;
  std::mt19937 rng(4);
  const BevImage img = random_image(rng, 37, 53, 0.4);
  save_png(img, dir / "bev.png");
  EXPECT_EQ(load_png(dir / "bev.png"), img);
  EXPECT_SAM3D_ERROR(load_png(dir / "missing.png"), ErrorKind::kIoFailure);

  GridConfig g;
  g.range = {-10, 10, -20, 20};
  g.sx = 0.2;
  g.dilation_kernel = 5;
  save_grid_sidecar(g, dir / "bev.json");
  const GridConfig back = load_grid_sidecar(dir / "bev.json");
  EXPECT_EQ(back.range.uy, 20);
  EXPECT_EQ(back.sx, 0.2);
  EXPECT_EQ(back.dilation_kernel, 5);
}

}  // namespace
}  // namespace sam3d
