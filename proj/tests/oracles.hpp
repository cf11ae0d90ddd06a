// Brute-force reference implementations used by the unit tests and the
// acceptance binary. Deliberately naive; none of them share code with the
// library beyond plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "sam3d/geometry.hpp"
#include "sam3d/segmenter.hpp"

namespace sam3d::oracle {

// Hull vertex set via the O(n^3) edge test: (i, j) is a hull edge when
// every other point is strictly left of it or lies on the open segment.
inline std::set<std::pair<double, double>> hull_vertices(const std::vector<Vec2>& pts) {
  std::set<std::pair<double, double>> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (pts[i] == pts[j]) continue;
      bool edge = true;
      for (std::size_t k = 0; k < n && edge; ++k) {
        if (pts[k] == pts[i] || pts[k] == pts[j]) continue;
        const double ex = pts[j].u - pts[i].u, ey = pts[j].v - pts[i].v;
        const double kx = pts[k].u - pts[i].u, ky = pts[k].v - pts[i].v;
        const double c = ex * ky - ey * kx;
        if (c > 0) continue;
        if (c < 0) {
          edge = false;
          continue;
        }
        const double t = (kx * ex + ky * ey) / (ex * ex + ey * ey);
        edge = t > 0 && t < 1;
      }
      if (edge) {
        out.insert({pts[i].u, pts[i].v});
        out.insert({pts[j].u, pts[j].v});
      }
    }
  }
  return out;
}

// Smallest enclosing rectangle area over orientations in 0.25 degree steps.
inline double sweep_min_rect_area(const std::vector<Vec2>& pts, double step_deg = 0.25) {
  double best = std::numeric_limits<double>::infinity();
  for (double deg = 0.0; deg < 90.0; deg += step_deg) {
    const double a = deg * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (const Vec2& p : pts) {
      const double x = c * p.u + s * p.v;
      const double y = -s * p.u + c * p.v;
      lo1 = std::min(lo1, x);
      hi1 = std::max(hi1, x);
      lo2 = std::min(lo2, y);
      hi2 = std::max(hi2, y);
    }
    best = std::min(best, (hi1 - lo1) * (hi2 - lo2));
  }
  return best;
}

// Four corners of every true pixel.
inline std::vector<Vec2> pixel_corners(const Bitmap& b) {
  std::vector<Vec2> out;
  for (int r = 0; r < b.h; ++r) {
    for (int c = 0; c < b.w; ++c) {
      if (!b.at(r, c)) continue;
      out.push_back({double(r), double(c)});
      out.push_back({double(r + 1), double(c)});
      out.push_back({double(r), double(c + 1)});
      out.push_back({double(r + 1), double(c + 1)});
    }
  }
  return out;
}

inline bool inside(double u, double v, const RotatedBox2D& b) {
  const double du = u - b.cx, dv = v - b.cy;
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  return std::abs(c * du + s * dv) <= b.dx / 2 && std::abs(-s * du + c * dv) <= b.dy / 2;
}

// Pixels whose centers fall inside the rectangle (continuous coordinates).
inline Bitmap digitize(const RotatedBox2D& box, int h, int w) {
  Bitmap b(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (inside(r + 0.5, c + 0.5, box)) b.set(r, c);
    }
  }
  return b;
}

inline double monte_carlo_iou(const RotatedBox2D& a, const RotatedBox2D& b, int samples, std::uint64_t seed) {
  auto reach = [](const RotatedBox2D& x) { return 0.5 * std::hypot(x.dx, x.dy); };
  const double u0 = std::min(a.cx - reach(a), b.cx - reach(b));
  const double u1 = std::max(a.cx + reach(a), b.cx + reach(b));
  const double v0 = std::min(a.cy - reach(a), b.cy - reach(b));
  const double v1 = std::max(a.cy + reach(a), b.cy + reach(b));
  struct Frame {
    RotatedBox2D b;
    double c, s;
    bool has(double u, double v) const {
      const double du = u - b.cx, dv = v - b.cy;
      return std::abs(c * du + s * dv) <= b.dx / 2 && std::abs(-s * du + c * dv) <= b.dy / 2;
    }
  };
  const Frame fa{a, std::cos(a.theta), std::sin(a.theta)};
  const Frame fb{b, std::cos(b.theta), std::sin(b.theta)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> du(u0, u1), dv(v0, v1);
  std::int64_t in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < samples; ++i) {
    const double u = du(rng), v = dv(rng);
    const bool ia = fa.has(u, v), ib = fb.has(u, v);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const std::int64_t uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : double(both) / double(uni);
}

// Average precision straight from the definition: walk detections by
// descending score and integrate the max-interpolated precision envelope
// over recall steps. Ties in score are broken by input order.
inline double average_precision(std::vector<std::pair<double, double>> score_weight, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  std::stable_sort(score_weight.begin(), score_weight.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<double> rec, prec;
  double tp = 0, w = 0;
  for (std::size_t i = 0; i < score_weight.size(); ++i) {
    if (score_weight[i].second >= 0) {
      tp += 1;
      w += score_weight[i].second;
    }
    rec.push_back(tp / double(n_gt));
    prec.push_back(w / double(i + 1));
  }
  double ap = 0, prev_r = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec[i] <= prev_r) continue;
    double envelope = 0;
    for (std::size_t j = i; j < prec.size(); ++j) envelope = std::max(envelope, prec[j]);
    ap += (rec[i] - prev_r) * envelope;
    prev_r = rec[i];
  }
  return ap;
}

}  // namespace sam3d::oracle
