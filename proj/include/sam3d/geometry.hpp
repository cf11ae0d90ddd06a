#pragma once

#include <array>
#include <span>
#include <vector>

namespace sam3d {

struct Mask;

struct Vec2 {
  double u = 0.0;
  double v = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.v + b.v}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.u, s * a.v}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
  friend bool operator<(const Vec2& a, const Vec2& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); }
};

inline double dot(Vec2 a, Vec2 b) { return a.u * b.u + a.v * b.v; }
inline double cross(Vec2 a, Vec2 b) { return a.u * b.v - a.v * b.u; }

/// Oriented rectangle. In pixel space (cx, cy) uses the index convention
/// (continuous center minus 0.5); the same struct also carries metric
/// BEV footprints. dx is the extent along direction theta, dy across it.
struct RotatedBox2D {
  double cx = 0.0;
  double cy = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  double theta = 0.0;

  Vec2 center() const { return {cx, cy}; }
  double area() const { return dx * dy; }
};

struct Polygon2D {
  std::vector<Vec2> vertices;  // counter-clockwise
  // Fewer than three non-collinear vertices (a point or a segment).
  bool degenerate = false;
};

// Maps any angle into (-pi/2, pi/2].
double canonical_angle(double theta);

/// Andrew's monotone chain. Collinear boundary points are dropped. A single
/// point or a collinear set comes back as a 1- or 2-vertex degenerate polygon.
Polygon2D convex_hull(std::span<const Vec2> points);

double polygon_area(std::span<const Vec2> vertices);  // signed, CCW positive

std::array<Vec2, 4> box_corners(const RotatedBox2D& box);

/// Minimum-area enclosing rectangle of the given points by rotating
/// calipers, in the raw coordinates of the points (no index offset).
/// theta lies in (-pi/4, pi/4]; dx is the side with that direction.
RotatedBox2D min_area_rect_of_points(std::span<const Vec2> points);

/// Minimum-area rectangle around the unit-square footprints of all true
/// mask pixels, reported in the index convention.
RotatedBox2D min_area_rect(const Mask& mask);

// Same rectangle re-expressed with dx as the longer side.
RotatedBox2D orient_long_side(const RotatedBox2D& box);

double rotated_iou(const RotatedBox2D& a, const RotatedBox2D& b);

// Boundary inclusive.
bool point_in_rotated_rect(Vec2 p, const RotatedBox2D& box);

// Smallest distance between the two rectangles; 0 when they touch or overlap.
double rect_distance(const RotatedBox2D& a, const RotatedBox2D& b);

}  // namespace sam3d
