#include "sam3d/bev_raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "sam3d/error.hpp"

namespace sam3d {

namespace {

int tiles(double lo, double hi, double step, const char* axis) {
  const double n = (hi - lo) / step;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-6 * std::max(1.0, rounded)) {
    throw Error(ErrorKind::kConfigError,
                std::string("range along ") + axis + " is not an integer number of pillars");
  }
  return static_cast<int>(rounded);
}

Rgb hsv_to_rgb(double hue_deg) {
  const double h = hue_deg / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0.0, g = 0.0, b = 0.0;
  switch (std::min(static_cast<int>(h), 5)) {
    case 0: r = 1.0; g = x; break;
    case 1: r = x; g = 1.0; break;
    case 2: g = 1.0; b = x; break;
    case 3: g = x; b = 1.0; break;
    case 4: r = x; b = 1.0; break;
    default: r = 1.0; b = x; break;
  }
  auto to8 = [](double c) { return static_cast<std::uint8_t>(std::lround(c * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

// True if a should win the cell over b.
bool wins(const Point& a, const Point& b) {
  if (a.intensity != b.intensity) return a.intensity > b.intensity;
  return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
}

}  // namespace

void GridConfig::validate() const {
  range.validate();
  if (!(sx > 0.0) || !(sy > 0.0)) throw Error(ErrorKind::kConfigError, "pillar sizes must be positive");
  tiles(range.lx, range.ux, sx, "x");
  tiles(range.ly, range.uy, sy, "y");
  if (dilation_kernel < 1 || dilation_kernel % 2 == 0) {
    throw Error(ErrorKind::kConfigError, "dilation kernel must be odd and >= 1");
  }
}

int GridConfig::height() const { return tiles(range.lx, range.ux, sx, "x"); }
int GridConfig::width() const { return tiles(range.ly, range.uy, sy, "y"); }

Palette::Palette(std::vector<Rgb> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kSize) {
    throw Error(ErrorKind::kConfigError,
                "palette needs exactly 256 entries, got " + std::to_string(entries_.size()));
  }
  if (entries_[0] == Rgb{0, 0, 0}) {
    throw Error(ErrorKind::kConfigError, "palette entry 0 must not be black");
  }
}

Palette Palette::default_ramp() {
  std::vector<Rgb> entries(kSize);
  for (std::size_t k = 0; k < kSize; ++k) {
    entries[k] = hsv_to_rgb(240.0 * (1.0 - static_cast<double>(k) / 255.0));
  }
  return Palette(std::move(entries));
}

Palette Palette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open palette " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, "palette " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorKind::kConfigError, "palette must be a JSON array");
  std::vector<Rgb> entries;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw Error(ErrorKind::kConfigError, "palette entries are [r,g,b]");
    Rgb c{};
    for (std::size_t k = 0; k < 3; ++k) {
      if (!e[k].is_number_integer() || e[k].get<int>() < 0 || e[k].get<int>() > 255) {
        throw Error(ErrorKind::kConfigError, "palette channels must be integers in [0,255]");
      }
      c[k] = static_cast<std::uint8_t>(e[k].get<int>());
    }
    entries.push_back(c);
  }
  return Palette(std::move(entries));
}

void Palette::save(const std::filesystem::path& path) const {
  nlohmann::json j = nlohmann::json::array();
  for (const Rgb& c : entries_) j.push_back({c[0], c[1], c[2]});
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path.string());
  out << j.dump() << '\n';
}

BevImage::BevImage(int height, int width, GridConfig grid)
    : height_(height),
      width_(width),
      grid_(grid),
      data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3, 0) {
  if (height < 1 || width < 1) throw Error(ErrorKind::kBadArgs, "image dimensions must be positive");
}

std::size_t BevImage::active_count() const {
  std::size_t n = 0;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) n += active(r, c) ? 1 : 0;
  }
  return n;
}

PixelIndex project_point(const Point& p, const GridConfig& grid) {
  const RangeSpec& rg = grid.range;
  if (!rg.contains(p.x, p.y)) throw Error(ErrorKind::kOutOfRange, "point outside the grid range");
  const int h = grid.height();
  const int w = grid.width();
  const auto cx = static_cast<long>(std::floor((rg.ux - static_cast<double>(p.x)) / grid.sx));
  const auto cy = static_cast<long>(std::floor((rg.uy - static_cast<double>(p.y)) / grid.sy));
  return {static_cast<int>(std::clamp<long>(cx, 0, h - 1)),
          static_cast<int>(std::clamp<long>(cy, 0, w - 1))};
}

Rgb palette_lookup(double r_norm, const Palette& palette) {
  if (!(r_norm >= 0.0 && r_norm <= 1.0)) {
    throw Error(ErrorKind::kDomainError, "normalized intensity outside [0,1]");
  }
  return palette[static_cast<std::size_t>(std::lround(r_norm * 255.0))];
}

BevImage rasterize(const PointCloud& cloud, const GridConfig& grid, const Palette& palette) {
  grid.validate();
  const int h = grid.height();
  const int w = grid.width();
  for (const Point& p : cloud.points) {
    if (!(p.intensity >= 0.0F && p.intensity <= 1.0F)) {
      throw Error(ErrorKind::kNotNormalized, "intensity outside [0,1]; normalize first");
    }
  }
  std::vector<std::int64_t> winner(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), -1);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point& p = cloud.points[i];
    if (!grid.range.contains(p.x, p.y)) continue;
    const PixelIndex px = project_point(p, grid);
    auto& slot = winner[static_cast<std::size_t>(px.row) * static_cast<std::size_t>(w) +
                        static_cast<std::size_t>(px.col)];
    if (slot < 0 || wins(p, cloud.points[static_cast<std::size_t>(slot)])) {
      slot = static_cast<std::int64_t>(i);
    }
  }
  BevImage img(h, w, grid);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto slot = winner[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                               static_cast<std::size_t>(c)];
      if (slot >= 0) {
        img.set(r, c, palette_lookup(cloud.points[static_cast<std::size_t>(slot)].intensity, palette));
      }
    }
  }
  return img;
}

BevImage dilate(const BevImage& img, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw Error(ErrorKind::kBadKernel, "kernel must be odd and >= 1, got " + std::to_string(kernel));
  }
  if (kernel == 1) return img;
  const int radius = kernel / 2;
  const int h = img.height();
  const int w = img.width();
  // A rectangular max window is separable: rows first, then columns.
  BevImage rows = img;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      Rgb m{0, 0, 0};
      for (int cc = std::max(0, c - radius); cc <= std::min(w - 1, c + radius); ++cc) {
        const Rgb v = img.at(r, cc);
        for (int k = 0; k < 3; ++k) m[k] = std::max(m[k], v[k]);
      }
      rows.set(r, c, m);
    }
  }
  BevImage out = rows;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      Rgb m{0, 0, 0};
      for (int rr = std::max(0, r - radius); rr <= std::min(h - 1, r + radius); ++rr) {
        const Rgb v = rows.at(rr, c);
        for (int k = 0; k < 3; ++k) m[k] = std::max(m[k], v[k]);
      }
      out.set(r, c, m);
    }
  }
  return out;
}

void save_png(const BevImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIoFailure, "cannot write PNG " + path.string() + ": " + msg);
  }
}

BevImage load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIoFailure, "cannot read PNG " + path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  BevImage img(static_cast<int>(image.height), static_cast<int>(image.width));
  if (png_image_finish_read(&image, nullptr, img.data().data(), 0, nullptr) == 0) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::kIoFailure, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

void save_grid_sidecar(const GridConfig& grid, const std::filesystem::path& path) {
  const nlohmann::json j = {{"lx", grid.range.lx}, {"ux", grid.range.ux}, {"ly", grid.range.ly},
                            {"uy", grid.range.uy}, {"sx", grid.sx},       {"sy", grid.sy},
                            {"dilation_kernel", grid.dilation_kernel}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

GridConfig load_grid_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    GridConfig g;
    g.range = {j.at("lx").get<double>(), j.at("ux").get<double>(), j.at("ly").get<double>(),
               j.at("uy").get<double>()};
    g.sx = j.at("sx").get<double>();
    g.sy = j.at("sy").get<double>();
    g.dilation_kernel = j.at("dilation_kernel").get<int>();
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, "grid sidecar " + path.string() + ": " + e.what());
  }
}

}  // namespace sam3d
