#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace layoutkit::geom {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({(b - a).norm(), (c - a).norm(), 1e-300});
  if (std::abs(v) <= 1e-12 * scale * scale) return 0;
  return v > 0.0 ? 1 : -1;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return p.x() <= std::max(a.x(), b.x()) + 1e-12 && p.x() >= std::min(a.x(), b.x()) - 1e-12 &&
         p.y() <= std::max(a.y(), b.y()) + 1e-12 && p.y() >= std::min(a.y(), b.y()) - 1e-12;
}

bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

double signed_area(std::span<const Vec2> poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= 1e-12) return false;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

bool is_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if ((poly[(i + 1) % n] - poly[i]).norm() <= 1e-12) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  // Adjacent edges folding back onto each other.
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[(i + n - 1) % n];
    const Vec2& b = poly[i];
    const Vec2& c = poly[(i + 1) % n];
    if (orientation(a, b, c) == 0 && (a - b).dot(c - b) > 0.0) return false;
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_boundary(const Vec2& p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

double ray_polygon_distance(const Vec2& origin, const Vec2& dir, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2 e = poly[(i + 1) % n] - a;
    const double denom = cross(dir, e);
    if (denom == 0.0) continue;
    const Vec2 w = a - origin;
    const double t = cross(w, e) / denom;
    const double s = cross(w, dir) / denom;
    if (t > 0.0 && s >= 0.0 && s <= 1.0) best = std::min(best, t);
  }
  return best;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  std::vector<Vec2> out(subject.begin(), subject.end());
  const double orient = signed_area(clip) >= 0.0 ? 1.0 : -1.0;
  const std::size_t m = clip.size();
  for (std::size_t k = 0; k < m && !out.empty(); ++k) {
    const Vec2& a = clip[k];
    const Vec2& b = clip[(k + 1) % m];
    auto inside = [&](const Vec2& p) { return orient * cross(b - a, p - a) >= 0.0; };
    std::vector<Vec2> in = std::move(out);
    out.clear();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& cur = in[i];
      const Vec2& prev = in[(i + in.size() - 1) % in.size()];
      const bool ci = inside(cur);
      const bool pi = inside(prev);
      if (ci != pi) {
        const Vec2 d = cur - prev;
        const double t = cross(b - a, a - prev) / cross(b - a, d);
        out.push_back(prev + t * d);
      }
      if (ci) out.push_back(cur);
    }
  }
  return out;
}

}  // namespace layoutkit::geom
