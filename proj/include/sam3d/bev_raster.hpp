#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sam3d/pointcloud_io.hpp"

namespace sam3d {

using Rgb = std::array<std::uint8_t, 3>;

// BEV grid. Rows follow x (descending from ux), columns follow y
// (descending from uy); both ranges must tile exactly into pillars.
struct GridConfig {
  RangeSpec range;
  double sx = 0.1;
  double sy = 0.1;
  int dilation_kernel = 3;

  void validate() const;
  int height() const;
  int width() const;
};

class Palette {
 public:
  static constexpr std::size_t kSize = 256;

  explicit Palette(std::vector<Rgb> entries);

  /// Blue-to-red ramp: entry k has HSV hue 240*(1 - k/255) degrees at full
  /// saturation and value, rounded to the nearest integer per channel.
  static Palette default_ramp();
  static Palette load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const Rgb& operator[](std::size_t k) const { return entries_[k]; }
  const std::vector<Rgb>& entries() const { return entries_; }

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<Rgb> entries_;
};

struct PixelIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

class BevImage {
 public:
  BevImage() = default;
  BevImage(int height, int width, GridConfig grid = {});

  int height() const { return height_; }
  int width() const { return width_; }
  const GridConfig& grid() const { return grid_; }

  Rgb at(int row, int col) const {
    const std::size_t i = offset(row, col);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int row, int col, const Rgb& c) {
    const std::size_t i = offset(row, col);
    data_[i] = c[0];
    data_[i + 1] = c[1];
    data_[i + 2] = c[2];
  }
  bool active(int row, int col) const {
    const std::size_t i = offset(row, col);
    return (data_[i] | data_[i + 1] | data_[i + 2]) != 0;
  }
  std::size_t active_count() const;

  // Interleaved row-major RGB bytes.
  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const BevImage& a, const BevImage& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(int row, int col) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) * 3;
  }

  int height_ = 0;
  int width_ = 0;
  GridConfig grid_;
  std::vector<std::uint8_t> data_;
};

PixelIndex project_point(const Point& p, const GridConfig& grid);
Rgb palette_lookup(double r_norm, const Palette& palette);

/// Writes each point's palette color into its cell. On collisions the
/// highest intensity wins, then the lexicographically smallest (x, y, z),
/// so the output does not depend on point order.
BevImage rasterize(const PointCloud& cloud, const GridConfig& grid, const Palette& palette);

// Channel-wise max over a kernel x kernel window, truncated at borders.
BevImage dilate(const BevImage& img, int kernel);

void save_png(const BevImage& img, const std::filesystem::path& path);
BevImage load_png(const std::filesystem::path& path);

// JSON sidecar {lx,ux,ly,uy,sx,sy,dilation_kernel}.
void save_grid_sidecar(const GridConfig& grid, const std::filesystem::path& path);
GridConfig load_grid_sidecar(const std::filesystem::path& path);

}  // namespace sam3d
