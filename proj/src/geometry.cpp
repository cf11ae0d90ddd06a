#include "sam3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sam3d/error.hpp"
#include "sam3d/segmenter.hpp"

namespace sam3d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInsideSlack = 1e-9;

RotatedBox2D canonical_rect(Vec2 center, Vec2 edge_dir, double len_along, double len_across) {
  double a = canonical_angle(std::atan2(edge_dir.v, edge_dir.u));
  RotatedBox2D box;
  box.cx = center.u;
  box.cy = center.v;
  if (a > -kPi / 4 && a <= kPi / 4) {
    box.dx = len_along;
    box.dy = len_across;
  } else {
    box.dx = len_across;
    box.dy = len_along;
    a = a > 0 ? a - kPi / 2 : a + kPi / 2;
  }
  box.theta = a;
  return box;
}

std::vector<Vec2> clip_against(const std::vector<Vec2>& poly, Vec2 a, Vec2 b) {
  std::vector<Vec2> out;
  if (poly.empty()) return out;
  const Vec2 edge = b - a;
  auto side = [&](Vec2 p) { return cross(edge, p - a); };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 cur = poly[i];
    const Vec2 prev = poly[(i + poly.size() - 1) % poly.size()];
    const double sc = side(cur);
    const double sp = side(prev);
    if (sc >= 0) {
      if (sp < 0) out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
      out.push_back(cur);
    } else if (sp >= 0) {
      out.push_back(prev + (sp / (sp - sc)) * (cur - prev));
    }
  }
  return out;
}

double segment_point_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 == 0.0 ? 0.0 : std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  const Vec2 d = p - (a + t * ab);
  return std::sqrt(dot(d, d));
}

}  // namespace

double canonical_angle(double theta) {
  double a = std::fmod(theta, kPi);
  if (a <= -kPi / 2) a += kPi;
  if (a > kPi / 2) a -= kPi;
  return a;
}

Polygon2D convex_hull(std::span<const Vec2> points) {
  if (points.empty()) throw Error(ErrorKind::kEmptyInput, "convex hull of an empty point set");
  std::vector<Vec2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() == 1) return {pts, true};

  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return {{pts.front(), pts.back()}, true};
  return {hull, false};
}

double polygon_area(std::span<const Vec2> vertices) {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    twice += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return 0.5 * twice;
}

std::array<Vec2, 4> box_corners(const RotatedBox2D& box) {
  const Vec2 e{std::cos(box.theta), std::sin(box.theta)};
  const Vec2 n{-e.v, e.u};
  const Vec2 c = box.center();
  const Vec2 hx = (box.dx / 2) * e;
  const Vec2 hy = (box.dy / 2) * n;
  return {c - hx - hy, c + hx - hy, c + hx + hy, c - hx + hy};
}

RotatedBox2D min_area_rect_of_points(std::span<const Vec2> points) {
  const Polygon2D hull = convex_hull(points);
  const auto& h = hull.vertices;
  if (hull.degenerate) {
    if (h.size() == 1) return {h[0].u, h[0].v, 0.0, 0.0, 0.0};
    const Vec2 d = h[1] - h[0];
    return canonical_rect(0.5 * (h[0] + h[1]), d, std::sqrt(dot(d, d)), 0.0);
  }

  double best_area = std::numeric_limits<double>::infinity();
  RotatedBox2D best;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vec2 d = h[(i + 1) % h.size()] - h[i];
    const double len = std::sqrt(dot(d, d));
    const Vec2 e = (1.0 / len) * d;
    const Vec2 n{-e.v, e.u};
    double lo_e = dot(h[0], e), hi_e = lo_e;
    double lo_n = dot(h[0], n), hi_n = lo_n;
    for (const Vec2& p : h) {
      const double pe = dot(p, e);
      const double pn = dot(p, n);
      lo_e = std::min(lo_e, pe);
      hi_e = std::max(hi_e, pe);
      lo_n = std::min(lo_n, pn);
      hi_n = std::max(hi_n, pn);
    }
    const double area = (hi_e - lo_e) * (hi_n - lo_n);
    // Relative slack keeps the first of several equal-area candidates.
    if (area < best_area * (1.0 - 1e-12)) {
      best_area = area;
      const Vec2 center = (0.5 * (lo_e + hi_e)) * e + (0.5 * (lo_n + hi_n)) * n;
      best = canonical_rect(center, e, hi_e - lo_e, hi_n - lo_n);
    }
  }
  return best;
}

RotatedBox2D min_area_rect(const Mask& mask) {
  const Bitmap bits = mask.decode();
  // Only the outermost pixels of each row can reach the hull.
  std::vector<Vec2> corners;
  for (int r = 0; r < bits.h; ++r) {
    int first = -1, last = -1;
    for (int c = 0; c < bits.w; ++c) {
      if (bits.at(r, c)) {
        if (first < 0) first = c;
        last = c;
      }
    }
    if (first < 0) continue;
    corners.push_back({static_cast<double>(r), static_cast<double>(first)});
    corners.push_back({static_cast<double>(r + 1), static_cast<double>(first)});
    corners.push_back({static_cast<double>(r), static_cast<double>(last + 1)});
    corners.push_back({static_cast<double>(r + 1), static_cast<double>(last + 1)});
  }
  if (corners.empty()) throw Error(ErrorKind::kEmptyMask, "minimum rectangle of an empty mask");
  RotatedBox2D box = min_area_rect_of_points(corners);
  box.cx -= 0.5;
  box.cy -= 0.5;
  return box;
}

RotatedBox2D orient_long_side(const RotatedBox2D& box) {
  if (box.dx >= box.dy) return box;
  RotatedBox2D out = box;
  std::swap(out.dx, out.dy);
  out.theta = canonical_angle(box.theta + kPi / 2);
  return out;
}

double rotated_iou(const RotatedBox2D& a, const RotatedBox2D& b) {
  const auto ca = box_corners(a);
  const auto cb = box_corners(b);
  std::vector<Vec2> poly(ca.begin(), ca.end());
  for (std::size_t i = 0; i < 4 && !poly.empty(); ++i) poly = clip_against(poly, cb[i], cb[(i + 1) % 4]);
  const double inter = poly.size() < 3 ? 0.0 : std::abs(polygon_area(poly));
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

bool point_in_rotated_rect(Vec2 p, const RotatedBox2D& box) {
  const Vec2 e{std::cos(box.theta), std::sin(box.theta)};
  const Vec2 n{-e.v, e.u};
  const Vec2 d = p - box.center();
  return std::abs(dot(d, e)) <= box.dx / 2 + kInsideSlack && std::abs(dot(d, n)) <= box.dy / 2 + kInsideSlack;
}

double rect_distance(const RotatedBox2D& a, const RotatedBox2D& b) {
  const auto ca = box_corners(a);
  const auto cb = box_corners(b);
  for (const Vec2& p : ca) {
    if (point_in_rotated_rect(p, b)) return 0.0;
  }
  for (const Vec2& p : cb) {
    if (point_in_rotated_rect(p, a)) return 0.0;
  }
  if (rotated_iou(a, b) > 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, segment_point_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, segment_point_distance(cb[j], ca[i], ca[(i + 1) % 4]));
    }
  }
  return best;
}

}  // namespace sam3d
