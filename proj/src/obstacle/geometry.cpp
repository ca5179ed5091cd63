#include "niform/obstacle/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace niform {

double signed_area(const Polygon& p) {
  double a = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) a += cross(p[i], p[(i + 1) % n]);
  return 0.5 * a;
}

std::optional<Vec2> area_centroid(const Polygon& p) {
  if (p.size() < 3) return std::nullopt;
  // Shift to the first vertex to keep the products small.
  const Vec2 o = p[0];
  double a = 0.0;
  Vec2 c{};
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    const Vec2 u = p[i] - o, v = p[(i + 1) % n] - o;
    const double w = cross(u, v);
    a += w;
    c += (u + v) * w;
  }
  double scale = 0.0;
  for (const auto& q : p) scale = std::max(scale, (q - o).norm());
  if (std::abs(a) <= 1e-12 * std::max(1.0, scale * scale)) return std::nullopt;
  return o + c / (3.0 * a);
}

Vec2 vertex_centroid(const Polygon& p) {
  Vec2 c{};
  for (const auto& q : p) c += q;
  return p.empty() ? c : c / static_cast<double>(p.size());
}

Polygon clip_to_disc(const Polygon& subject, Vec2 center, double radius, int segments) {
  Polygon out = subject;
  for (int k = 0; k < segments && !out.empty(); ++k) {
    const double t0 = 2.0 * std::numbers::pi * k / segments;
    const double t1 = 2.0 * std::numbers::pi * (k + 1) / segments;
    const Vec2 a = center + Vec2{std::cos(t0), std::sin(t0)} * radius;
    const Vec2 b = center + Vec2{std::cos(t1), std::sin(t1)} * radius;
    const Vec2 e = b - a;
    auto inside = [&](Vec2 q) { return cross(e, q - a) >= 0.0; };
    auto hit = [&](Vec2 p, Vec2 q) {
      const double dp = cross(e, p - a), dq = cross(e, q - a);
      return p + (q - p) * (dp / (dp - dq));
    };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t i = 0, n = in.size(); i < n; ++i) {
      const Vec2 cur = in[i], prev = in[(i + n - 1) % n];
      if (inside(cur)) {
        if (!inside(prev)) out.push_back(hit(prev, cur));
        out.push_back(cur);
      } else if (inside(prev)) {
        out.push_back(hit(prev, cur));
      }
    }
  }
  return out;
}

Vec2 project_onto_line(Vec2 p, Vec2 a, Vec2 dir) {
  const Vec2 u = dir.normalized();
  return a + u * dot(p - a, u);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double L2 = dot(ab, ab);
  if (L2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / L2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

std::optional<std::pair<double, double>> line_circle(Vec2 origin, Vec2 dir, Vec2 center, double r) {
  const Vec2 u = dir.normalized();
  const Vec2 oc = origin - center;
  const double b = dot(oc, u);
  const double disc = b * b - (dot(oc, oc) - r * r);
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return std::make_pair(-b - s, -b + s);
}

namespace {

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

}  // namespace

bool is_simple(const Polygon& p) {
  const std::size_t n = p.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
    }
  return true;
}

}  // namespace niform
