#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace niform {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double k) { x *= k; y *= k; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
  friend Vec2 operator*(double k, Vec2 a) { return {a.x * k, a.y * k}; }
  friend Vec2 operator/(Vec2 a, double k) { return {a.x / k, a.y / k}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

  double norm() const { return std::hypot(x, y); }
  // Left normal.
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

using Polygon = std::vector<Vec2>;

// Shoelace signed area (ccw positive).
double signed_area(const Polygon& p);
// Area centroid; nullopt when the area is (numerically) zero.
std::optional<Vec2> area_centroid(const Polygon& p);
Vec2 vertex_centroid(const Polygon& p);

// Sutherland–Hodgman clip against a regular `segments`-gon inscribed in the disc.
Polygon clip_to_disc(const Polygon& subject, Vec2 center, double radius, int segments = 128);

// Foot of the perpendicular from p onto the line through a with direction dir.
Vec2 project_onto_line(Vec2 p, Vec2 a, Vec2 dir);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
// Parameters t (along unit `dir`) where origin + t·dir meets the circle.
std::optional<std::pair<double, double>> line_circle(Vec2 origin, Vec2 dir, Vec2 center, double r);

// True when no two non-adjacent edges intersect.
bool is_simple(const Polygon& p);

}  // namespace niform
