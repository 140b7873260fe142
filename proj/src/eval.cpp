#include "layoutkit/eval.hpp"

#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace layoutkit::eval {

using geom::Vec2;

namespace {

using Span = std::pair<double, double>;

// Interior x-spans of a polygon along the horizontal line z (even-odd rule).
void row_spans(std::span<const Vec2> poly, double z, std::vector<Span>& out, std::vector<double>& xs) {
  out.clear();
  xs.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((a.y() <= z) == (b.y() <= z)) continue;
    xs.push_back(a.x() + (z - a.y()) / (b.y() - a.y()) * (b.x() - a.x()));
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 0; k + 1 < xs.size(); k += 2) out.emplace_back(xs[k], xs[k + 1]);
}

double span_length(const std::vector<Span>& s) {
  double t = 0.0;
  for (const auto& [a, b] : s) t += b - a;
  return t;
}

double overlap_length(const std::vector<Span>& s, const std::vector<Span>& t) {
  double total = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < s.size() && j < t.size()) {
    const double lo = std::max(s[i].first, t[j].first);
    const double hi = std::min(s[i].second, t[j].second);
    if (hi > lo) total += hi - lo;
    if (s[i].second < t[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

void check_height(const ManhattanLayout& L) {
  if (!(L.ceiling > L.floor)) throw DomainError("layout has no height");
  if (L.vertices.size() < 3) throw DomainError("layout needs at least three vertices");
}

}  // namespace

double raster_area(std::span<const Vec2> poly, double z0, double z1, int rows) {
  const double dz = (z1 - z0) / rows;
  std::vector<Span> spans;
  std::vector<double> xs;
  double area = 0.0;
  for (int r = 0; r < rows; ++r) {
    row_spans(poly, z0 + (r + 0.5) * dz, spans, xs);
    area += span_length(spans);
  }
  return area * dz;
}

double iou3d(const ManhattanLayout& a, const ManhattanLayout& b, int grid) {
  check_height(a);
  check_height(b);
  if (grid < 1) throw DomainError("grid must be positive");
  double z0 = std::numeric_limits<double>::infinity();
  double z1 = -z0;
  for (const auto* L : {&a, &b}) {
    for (const auto& v : L->vertices) {
      z0 = std::min(z0, v.y());
      z1 = std::max(z1, v.y());
    }
  }
  const double dz = (z1 - z0) / grid;
  std::vector<Span> sa;
  std::vector<Span> sb;
  std::vector<double> xs;
  double area_a = 0.0;
  double area_b = 0.0;
  double area_i = 0.0;
  for (int r = 0; r < grid; ++r) {
    const double z = z0 + (r + 0.5) * dz;
    row_spans(a.vertices, z, sa, xs);
    row_spans(b.vertices, z, sb, xs);
    area_a += span_length(sa);
    area_b += span_length(sb);
    area_i += overlap_length(sa, sb);
  }
  const double ha = a.ceiling - a.floor;
  const double hb = b.ceiling - b.floor;
  const double hi = std::max(0.0, std::min(a.ceiling, b.ceiling) - std::max(a.floor, b.floor));
  const double va = area_a * dz * ha;
  const double vb = area_b * dz * hb;
  const double vi = area_i * dz * hi;
  const double uni = va + vb - vi;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(vi / uni, 0.0, 1.0);
}

namespace {

double point_distance(double u0, double v0, double u1, double v1, int width) {
  const double du = geom::wrapped_column_delta(u0, u1, width);
  const double dv = v1 - v0;
  return std::sqrt(du * du + dv * dv);
}

}  // namespace

CornerErrorResult corner_error(const maps::CornerSet& pred, const maps::CornerSet& gt, int width) {
  const int n = static_cast<int>(gt.size());
  const int m = static_cast<int>(pred.size());
  if (n == 0) throw DomainError("empty ground-truth corner set");
  const double height = width / 2.0;
  const double diag = std::sqrt(static_cast<double>(width) * width + height * height);
  const double cu = width / 2.0;
  const double cv = height / 2.0;

  auto match = [&](int i, int j) {
    const auto& p = pred.corners[i];
    const auto& g = gt.corners[j];
    return point_distance(p.u, p.v_top, g.u, g.v_top, width) + point_distance(p.u, p.v_bot, g.u, g.v_bot, width);
  };
  auto pad = [&](int j) {
    const auto& g = gt.corners[j];
    return point_distance(cu, cv, g.u, g.v_top, width) + point_distance(cu, cv, g.u, g.v_bot, width);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double best = kInf;
  if (m == 0) {
    best = 0.0;
    for (int j = 0; j < n; ++j) best += pad(j);
  }
  std::vector<double> D(static_cast<std::size_t>(m + 1) * (n + 1));
  auto at = [&](int i, int j) -> double& { return D[static_cast<std::size_t>(i) * (n + 1) + j]; };
  for (int s = 0; s < m; ++s) {
    std::fill(D.begin(), D.end(), kInf);
    at(0, 0) = 0.0;
    for (int i = 0; i <= m; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double cur = at(i, j);
        if (cur == kInf) continue;
        if (i < m && j < n) at(i + 1, j + 1) = std::min(at(i + 1, j + 1), cur + match((i + s) % m, j));
        if (m > n && i < m) at(i + 1, j) = std::min(at(i + 1, j), cur);
        if (m < n && j < n) at(i, j + 1) = std::min(at(i, j + 1), cur + pad(j));
      }
    }
    best = std::min(best, at(m, n));
  }
  CornerErrorResult res;
  res.percent = best / (2.0 * n) / diag * 100.0;
  res.padded = std::max(0, n - m);
  res.skipped = std::max(0, m - n);
  return res;
}

CornerErrorResult corner_error(const ManhattanLayout& pred, const ManhattanLayout& gt, int width) {
  return corner_error(solver::project_corners(pred, width), solver::project_corners(gt, width), width);
}

std::vector<Surface> surface_labels(const ManhattanLayout& L, int width) {
  const int height = width / 2;
  std::vector<Surface> out(static_cast<std::size_t>(width) * height, Surface::wall);
  const double h = L.camera_height;
  for (int u = 0; u < width; ++u) {
    const double theta = geom::azimuth_of_column(u, width);
    const double r = geom::ray_polygon_distance(L.camera, Vec2(std::sin(theta), std::cos(theta)), L.vertices);
    const double top = std::atan2(L.ceiling - h, r);
    const double bottom = -std::atan2(h - L.floor, r);
    for (int v = 0; v < height; ++v) {
      const double phi = geom::elevation_of_row(v, width);
      Surface s = Surface::wall;
      if (phi > top) {
        s = Surface::ceiling;
      } else if (phi < bottom) {
        s = Surface::floor;
      }
      out[static_cast<std::size_t>(v) * width + u] = s;
    }
  }
  return out;
}

double pixel_error(const ManhattanLayout& pred, const ManhattanLayout& gt, int width) {
  const auto a = surface_labels(pred, width);
  const auto b = surface_labels(gt, width);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
  return 100.0 * static_cast<double>(diff) / static_cast<double>(a.size());
}

LayoutMetrics evaluate(const ManhattanLayout& pred, const ManhattanLayout& gt, int width) {
  return {iou3d(pred, gt), corner_error(pred, gt, width).percent, pixel_error(pred, gt, width)};
}

}  // namespace layoutkit::eval
