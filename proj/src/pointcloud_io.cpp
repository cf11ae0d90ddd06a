#include "sam3d/pointcloud_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sam3d/error.hpp"

namespace sam3d {

namespace {

constexpr std::size_t kRecordBytes = 16;

std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_le32(std::uint32_t v, char* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
}

void check_finite(const Point& p, std::size_t index) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
      !std::isfinite(p.intensity)) {
    throw Error(ErrorKind::kValueError, "non-finite field in record " + std::to_string(index));
  }
}

PointCloud load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIoFailure, "read failed: " + path.string());
  if (bytes.size() % kRecordBytes != 0) {
    throw Error(ErrorKind::kFormatError,
                path.string() + ": size " + std::to_string(bytes.size()) +
                    " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / kRecordBytes);
  for (std::size_t off = 0; off < bytes.size(); off += kRecordBytes) {
    std::array<float, 4> f{};
    for (std::size_t k = 0; k < 4; ++k) {
      f[k] = std::bit_cast<float>(load_le32(bytes.data() + off + 4 * k));
    }
    Point p{f[0], f[1], f[2], f[3]};
    check_finite(p, off / kRecordBytes);
    cloud.points.push_back(p);
  }
  return cloud;
}

float parse_float(const std::string& token, std::size_t line_no) {
  std::size_t used = 0;
  float v = 0.0F;
  try {
    v = std::stof(token, &used);
  } catch (const std::out_of_range&) {
    throw Error(ErrorKind::kValueError, "line " + std::to_string(line_no) + ": value out of range");
  } catch (const std::exception&) {
    throw Error(ErrorKind::kFormatError,
                "line " + std::to_string(line_no) + ": non-numeric token '" + token + "'");
  }
  if (used != token.size()) {
    throw Error(ErrorKind::kFormatError,
                "line " + std::to_string(line_no) + ": non-numeric token '" + token + "'");
  }
  return v;
}

PointCloud load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path.string());
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 4) {
      throw Error(ErrorKind::kFormatError, "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                               std::to_string(tokens.size()));
    }
    Point p{parse_float(tokens[0], line_no), parse_float(tokens[1], line_no),
            parse_float(tokens[2], line_no), parse_float(tokens[3], line_no)};
    check_finite(p, cloud.points.size());
    cloud.points.push_back(p);
  }
  if (in.bad()) throw Error(ErrorKind::kIoFailure, "read failed: " + path.string());
  return cloud;
}

}  // namespace

void RangeSpec::validate() const {
  if (!(lx < ux) || !(ly < uy)) {
    throw Error(ErrorKind::kConfigError, "range requires lx < ux and ly < uy");
  }
}

CloudFormat parse_cloud_format(const std::string& name) {
  if (name == "binary_xyzi" || name == "binary" || name == "bin") return CloudFormat::kBinaryXyzi;
  if (name == "text_xyzi" || name == "text" || name == "txt") return CloudFormat::kTextXyzi;
  throw Error(ErrorKind::kConfigError, "unknown cloud format '" + name + "'");
}

CloudFormat guess_cloud_format(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? CloudFormat::kBinaryXyzi : CloudFormat::kTextXyzi;
}

IntensityMode parse_intensity_mode(const std::string& name) {
  if (name == "minmax_per_frame") return IntensityMode::kMinmaxPerFrame;
  if (name == "clip_unit") return IntensityMode::kClipUnit;
  throw Error(ErrorKind::kConfigError, "unknown intensity mode '" + name + "'");
}

std::string to_string(IntensityMode mode) {
  return mode == IntensityMode::kMinmaxPerFrame ? "minmax_per_frame" : "clip_unit";
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorKind::kIoFailure, "no such file: " + path.string());
  }
  PointCloud cloud = format == CloudFormat::kBinaryXyzi ? load_binary(path) : load_text(path);
  cloud.frame_id = path.stem().string();
  return cloud;
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot write " + path.string());
  if (format == CloudFormat::kBinaryXyzi) {
    std::vector<char> buf(cloud.points.size() * kRecordBytes);
    char* p = buf.data();
    for (const Point& pt : cloud.points) {
      for (float f : {pt.x, pt.y, pt.z, pt.intensity}) {
        store_le32(std::bit_cast<std::uint32_t>(f), p);
        p += 4;
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  } else {
    out.precision(9);
    for (const Point& pt : cloud.points) {
      out << pt.x << ' ' << pt.y << ' ' << pt.z << ' ' << pt.intensity << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::kIoFailure, "write failed: " + path.string());
}

PointCloud crop_to_range(const PointCloud& cloud, const RangeSpec& range) {
  PointCloud out;
  out.frame_id = cloud.frame_id;
  std::copy_if(cloud.points.begin(), cloud.points.end(), std::back_inserter(out.points),
               [&](const Point& p) { return range.contains(p.x, p.y); });
  return out;
}

PointCloud normalize_intensity(const PointCloud& cloud, IntensityMode mode) {
  PointCloud out = cloud;
  if (mode == IntensityMode::kClipUnit) {
    for (Point& p : out.points) p.intensity = std::clamp(p.intensity, 0.0F, 1.0F);
    return out;
  }
  if (cloud.empty()) throw Error(ErrorKind::kEmptyCloud, "minmax normalization of an empty cloud");
  const auto [lo_it, hi_it] = std::minmax_element(
      cloud.points.begin(), cloud.points.end(),
      [](const Point& a, const Point& b) { return a.intensity < b.intensity; });
  const double lo = lo_it->intensity;
  const double hi = hi_it->intensity;
  if (hi == lo) {
    for (Point& p : out.points) p.intensity = 0.5F;
    return out;
  }
  const double span = hi - lo;
  for (Point& p : out.points) {
    const double t = (static_cast<double>(p.intensity) - lo) / span;
    p.intensity = std::clamp(static_cast<float>(t), 0.0F, 1.0F);
  }
  return out;
}

}  // namespace sam3d
