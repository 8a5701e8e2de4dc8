#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "meip/error.hpp"

namespace meip::fold {

inline constexpr double kTol = 1e-9;  // absolute coincidence tolerance
inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline bool near(Vec2 a, Vec2 b, double tol = kTol) { return norm(a - b) <= tol; }

/// Signed area, positive for counter-clockwise vertex order.
inline double signed_area(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

namespace detail {

inline int orient(Vec2 a, Vec2 b, Vec2 c) {
  double v = cross(b - a, c - a);
  return v > kTol ? 1 : v < -kTol ? -1 : 0;
}

inline bool on_segment(Vec2 p, Vec2 a, Vec2 b) { return segment_distance(p, a, b) <= kTol; }

/// Closed-segment intersection test, touching included.
inline bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d);
}

}  // namespace detail

/// Throws GeometryError unless `p` is a simple polygon with positive area.
/// Clockwise input is reversed to counter-clockwise.
inline std::vector<Vec2> checked_polygon(std::vector<Vec2> p) {
  if (p.size() < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const auto& v : p)
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw GeometryError("polygon vertex is not finite");
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i)
    if (near(p[i], p[(i + 1) % n])) throw GeometryError("polygon has a zero-length edge");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges share a vertex
      if (detail::segments_touch(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]))
        throw GeometryError("polygon is self-intersecting (edges " + std::to_string(i) + " and " +
                            std::to_string(j) + ")");
    }
  double a = signed_area(p);
  if (std::abs(a) <= kTol) throw GeometryError("polygon has zero area");
  if (a < 0.0) std::reverse(p.begin(), p.end());
  return p;
}

inline bool is_convex(const std::vector<Vec2>& p) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (cross(p[(i + 1) % p.size()] - p[i], p[(i + 2) % p.size()] - p[(i + 1) % p.size()]) < -kTol) return false;
  return true;
}

/// Strictly inside a counter-clockwise convex polygon, farther than kTol from its boundary.
inline bool strictly_inside(Vec2 q, const std::vector<Vec2>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec2 a = p[i], b = p[(i + 1) % p.size()];
    if (cross(b - a, q - a) / norm(b - a) <= kTol) return false;
  }
  return true;
}

/// Inside or within kTol of the boundary of a counter-clockwise convex polygon.
inline bool inside_or_on(Vec2 q, const std::vector<Vec2>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec2 a = p[i], b = p[(i + 1) % p.size()];
    if (cross(b - a, q - a) / norm(b - a) < -kTol) return false;
  }
  return true;
}

/// Oriented line through `point` with unit direction `dir`; side() is positive
/// where normal() points.
struct Line {
  Vec2 point;
  Vec2 dir;

  static Line from_normal(Vec2 point, double theta) { return {point, {-std::sin(theta), std::cos(theta)}}; }
  Vec2 normal() const { return {dir.y, -dir.x}; }
  double side(Vec2 q) const { return dot(q - point, normal()); }
  double param(Vec2 q) const { return dot(q - point, dir); }
  Vec2 at(double t) const { return point + t * dir; }
  Vec2 reflect(Vec2 q) const { return q - 2.0 * side(q) * normal(); }
};

/// Parameter interval where `line` crosses a convex polygon, if any.
inline std::optional<std::pair<double, double>> clip_line(const Line& line, const std::vector<Vec2>& p) {
  double lo = -1e300, hi = 1e300;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec2 a = p[i], b = p[(i + 1) % p.size()];
    Vec2 e = b - a;
    // inside half-plane: cross(e, q - a) >= 0 with q = point + t dir
    double c0 = cross(e, line.point - a), c1 = cross(e, line.dir);
    if (std::abs(c1) < 1e-15) {
      if (c0 < -kTol * norm(e)) return std::nullopt;
      continue;
    }
    double t = -c0 / c1;
    if (c1 > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  if (hi - lo <= kTol) return std::nullopt;
  return std::make_pair(lo, hi);
}

/// Part of a convex polygon on the side of `line` with sign `sign` (+1 left,
/// -1 right). Entries of `origin` report where each output vertex came from:
/// the input vertex index, or -1 - i for a new vertex cut on input edge i.
inline std::vector<Vec2> clip_polygon(const std::vector<Vec2>& p, const Line& line, int sign,
                                      std::vector<long>* origin = nullptr) {
  std::vector<Vec2> out;
  if (origin) origin->clear();
  const std::size_t n = p.size();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = sign * line.side(p[i]);
    if (std::abs(s[i]) <= kTol) s[i] = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = (i + 1) % n;
    if (s[i] >= 0.0) {
      out.push_back(p[i]);
      if (origin) origin->push_back(static_cast<long>(i));
    }
    if ((s[i] > 0.0 && s[j] < 0.0) || (s[i] < 0.0 && s[j] > 0.0)) {
      double t = s[i] / (s[i] - s[j]);
      out.push_back(p[i] + t * (p[j] - p[i]));
      if (origin) origin->push_back(-1 - static_cast<long>(i));
    }
  }
  return out;
}

}  // namespace meip::fold
