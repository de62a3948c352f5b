#ifndef SGRS_GEOMETRY_HPP
#define SGRS_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace sgrs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Polygon {
  std::vector<Vec2> vertices;

  std::size_t edge_count() const { return vertices.size(); }
  Segment edge(std::size_t i) const { return {vertices[i], vertices[(i + 1) % vertices.size()]}; }

  double signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    return 0.5 * a;
  }
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

inline double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (s.a + d * t));
}

/// Even-odd ray casting; points on the boundary may land either way.
inline bool point_in_polygon(Vec2 p, const Polygon& poly) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline double point_polygon_distance(Vec2 p, const Polygon& poly) {
  double best = INFINITY;
  for (std::size_t i = 0; i < poly.edge_count(); ++i) best = std::min(best, point_segment_distance(p, poly.edge(i)));
  return best;
}

namespace detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace detail

inline bool segments_intersect(const Segment& s, const Segment& t) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(s.a, s.b, t.a), o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a), o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

/// True when no two non-adjacent edges touch.
inline bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.edge_count();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly.edge(i), poly.edge(j))) return false;
    }
  }
  return true;
}

/// First contact of a disc of `radius` whose center moves from `p` by `d`
/// (parameter t in [0, 1]) against the capsule around `seg`. Only approaching
/// contacts count, so a disc resting on the surface and moving away is free.
struct Contact {
  double t = 0.0;
  Vec2 normal;  // unit, pointing from the obstacle toward the disc center
};

inline std::optional<Contact> sweep_disc_segment(Vec2 p, Vec2 d, double radius, const Segment& seg) {
  std::optional<Contact> best;
  auto consider = [&](double t, Vec2 n) {
    if (t < 0.0 || t > 1.0) return;
    if (dot(d, n) >= 0.0) return;
    if (!best || t < best->t) best = Contact{t, n};
  };

  const Vec2 e = seg.b - seg.a;
  const double len = norm(e);
  if (len > 0.0) {
    Vec2 n{-e.y / len, e.x / len};
    double s0 = dot(p - seg.a, n);
    if (s0 < 0.0) {
      n = n * -1.0;
      s0 = -s0;
    }
    const double closing = -dot(d, n);
    if (closing > 0.0) {
      const double t = std::max(0.0, (s0 - radius) / closing);
      const Vec2 c = p + d * t;
      const double u = dot(c - seg.a, e) / (len * len);
      if (u >= 0.0 && u <= 1.0 && s0 - radius <= closing) consider(t, n);
    }
  }

  for (Vec2 v : {seg.a, seg.b}) {
    const Vec2 m = p - v;
    const double a = dot(d, d);
    if (a == 0.0) continue;
    const double b = 2.0 * dot(m, d);
    const double c = dot(m, m) - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) continue;
    double t = (-b - std::sqrt(disc)) / (2.0 * a);
    if (c <= 0.0) t = 0.0;  // already touching
    const Vec2 hit = p + d * t - v;
    const double hn = norm(hit);
    if (hn == 0.0) continue;
    consider(t, hit * (1.0 / hn));
  }
  return best;
}

inline Vec2 reflect(Vec2 v, Vec2 unit_normal) { return v - unit_normal * (2.0 * dot(v, unit_normal)); }

}  // namespace sgrs

#endif  // SGRS_GEOMETRY_HPP
