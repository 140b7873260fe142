#include "layoutkit/layout.hpp"

#include "layoutkit/error.hpp"
#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace layoutkit::solver {

namespace {

constexpr double kRightAngleTol = 1e-6;

double wrap_quarter(double a) {
  // Into [-pi/4, pi/4).
  const double q = geom::kPi / 2.0;
  a = std::fmod(a + q / 2.0, q);
  if (a < 0.0) a += q;
  if (a > q - 1e-12) a = 0.0;  // rounding just below +pi/4 belongs to -pi/4
  return a - q / 2.0;
}

Vec2 rotate_xz(const Vec2& p, double a) {
  // Standard rotation of (x, z) by a.
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

}  // namespace

Vec3 ManhattanLayout::floor_corner(int i) const {
  return {vertices[i].x(), floor, vertices[i].y()};
}

Vec3 ManhattanLayout::ceiling_corner(int i) const {
  return {vertices[i].x(), ceiling, vertices[i].y()};
}

std::optional<std::string> layout_violation(const ManhattanLayout& layout) {
  const auto& v = layout.vertices;
  const std::size_t n = v.size();
  if (n < 4 || n % 2 != 0) return "wall count must be even and at least 4";
  for (const auto& p : v) {
    if (!p.allFinite()) return "non-finite vertex";
  }
  if (!layout.camera.allFinite() || !std::isfinite(layout.floor) || !std::isfinite(layout.ceiling) ||
      !std::isfinite(layout.camera_height)) {
    return "non-finite camera or levels";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[(i + 1) % n] - v[i];
    const Vec2 b = v[(i + 2) % n] - v[(i + 1) % n];
    const double la = a.norm();
    const double lb = b.norm();
    if (la <= 1e-12 || lb <= 1e-12) return "zero-length wall";
    if (std::abs(a.dot(b)) > kRightAngleTol * la * lb) return "consecutive walls are not perpendicular";
  }
  if (!geom::is_simple_polygon(v)) return "polygon is self-intersecting";
  if (geom::signed_area(v) >= 0.0) return "vertices are not in increasing-azimuth order";
  if (!geom::point_in_polygon(layout.camera, v)) return "camera is not inside the layout";
  if (!(layout.floor < layout.camera_height && layout.camera_height < layout.ceiling)) {
    return "camera must lie strictly between floor and ceiling";
  }
  return std::nullopt;
}

void validate(const ManhattanLayout& layout) {
  if (auto why = layout_violation(layout)) throw Error(ErrorCode::invalid_layout, "invalid layout: " + *why);
}

ManhattanLayout oriented(ManhattanLayout layout) {
  if (geom::signed_area(layout.vertices) > 0.0) std::reverse(layout.vertices.begin(), layout.vertices.end());
  return layout;
}

double manhattan_yaw(const ManhattanLayout& layout) {
  // Average the edge angles modulo 90 degrees on the circle of period pi/2.
  double sx = 0.0;
  double sy = 0.0;
  const auto& v = layout.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 e = v[(i + 1) % v.size()] - v[i];
    const double a = 4.0 * std::atan2(e.y(), e.x());
    const double w = e.norm();
    sx += w * std::cos(a);
    sy += w * std::sin(a);
  }
  return wrap_quarter(std::atan2(sy, sx) / 4.0);
}

int first_vertex_by_column(const ManhattanLayout& layout, int width) {
  int best = 0;
  double best_u = 1e300;
  for (int i = 0; i < layout.wall_count(); ++i) {
    const double u = project(layout, layout.floor_corner(i), width).u;
    if (u < best_u) {
      best_u = u;
      best = i;
    }
  }
  return best;
}

std::vector<int> reflex_vertices(const ManhattanLayout& layout) {
  std::vector<int> out;
  const auto& v = layout.vertices;
  const int n = static_cast<int>(v.size());
  const double orient = geom::signed_area(v) < 0.0 ? -1.0 : 1.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = v[i] - v[(i + n - 1) % n];
    const Vec2 b = v[(i + 1) % n] - v[i];
    const double turn = a.x() * b.y() - a.y() * b.x();
    if (turn * orient < 0.0) out.push_back(i);
  }
  return out;
}

geom::PixelCoord project(const ManhattanLayout& layout, const Vec3& point, int width) {
  return geom::dir_to_pix(Vec3(point - layout.camera_position()), width);
}

maps::CornerSet project_corners(const ManhattanLayout& layout, int width) {
  maps::CornerSet set;
  set.width = width;
  for (int i = 0; i < layout.wall_count(); ++i) {
    const auto top = project(layout, layout.ceiling_corner(i), width);
    const auto bot = project(layout, layout.floor_corner(i), width);
    set.corners.push_back({bot.u, top.v, bot.v, 1.0, 0.0});
  }
  std::sort(set.corners.begin(), set.corners.end(), [](const auto& a, const auto& b) { return a.u < b.u; });
  return set;
}

ManhattanLayout yawed(const ManhattanLayout& layout, double angle) {
  // Positive angle increases azimuth atan2(x, z), i.e. rotates (x, z) by -angle.
  ManhattanLayout out = layout;
  for (auto& p : out.vertices) p = layout.camera + rotate_xz(p - layout.camera, -angle);
  return out;
}

CuboidParams canonical(const CuboidParams& d) {
  CuboidParams c = d;
  const double q = geom::kPi / 2.0;
  const double wrapped = wrap_quarter(d.r_theta);
  const long turns = std::lround((d.r_theta - wrapped) / q);
  if (turns % 2 != 0) std::swap(c.s_w, c.s_l);
  c.r_theta = wrapped;
  return c;
}

ManhattanLayout layout_from_params(const CuboidParams& d, double camera_height) {
  if (!(d.s_w > 0.0 && d.s_l > 0.0 && d.s_h > 0.0)) throw DomainError("cuboid sizes must be positive");
  ManhattanLayout layout;
  const Vec2 centre(d.t_x, d.t_z);
  const double hw = 0.5 * d.s_w;
  const double hl = 0.5 * d.s_l;
  const std::array<Vec2, 4> local{Vec2(-hw, -hl), Vec2(hw, -hl), Vec2(hw, hl), Vec2(-hw, hl)};
  for (const auto& p : local) layout.vertices.push_back(centre + rotate_xz(p, d.r_theta));
  layout.camera = Vec2::Zero();
  layout.camera_height = camera_height;
  layout.floor = 0.0;
  layout.ceiling = d.s_h;
  return oriented(std::move(layout));
}

CuboidParams params_from_layout(const ManhattanLayout& layout) {
  if (layout.wall_count() != 4) throw DomainError("cuboid parameters need exactly four walls");
  const auto& v = layout.vertices;
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = v[(i + 1) % 4] - v[i];
    const Vec2 b = v[(i + 2) % 4] - v[(i + 1) % 4];
    if (std::abs(a.dot(b)) > kRightAngleTol * a.norm() * b.norm()) throw DomainError("layout is not a rectangle");
  }
  // Frame angle from the first edge, reduced to [-pi/4, pi/4).
  const Vec2 e0 = v[1] - v[0];
  const double r = wrap_quarter(std::atan2(e0.y(), e0.x()));
  const Vec2 ax(std::cos(r), std::sin(r));
  const Vec2 az(-std::sin(r), std::cos(r));
  double xmin = 1e300, xmax = -1e300, zmin = 1e300, zmax = -1e300;
  for (const auto& p : v) {
    const double px = (p - layout.camera).dot(ax);
    const double pz = (p - layout.camera).dot(az);
    xmin = std::min(xmin, px);
    xmax = std::max(xmax, px);
    zmin = std::min(zmin, pz);
    zmax = std::max(zmax, pz);
  }
  CuboidParams d;
  d.s_w = xmax - xmin;
  d.s_l = zmax - zmin;
  d.s_h = layout.ceiling - layout.floor;
  const Vec2 centre = layout.camera + 0.5 * (xmin + xmax) * ax + 0.5 * (zmin + zmax) * az;
  d.t_x = centre.x() - layout.camera.x();
  d.t_z = centre.y() - layout.camera.y();
  d.r_theta = r;
  return d;
}

}  // namespace layoutkit::solver
