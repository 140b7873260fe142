#include "layoutkit/solver.hpp"

#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace layoutkit::solver {

using Eigen::VectorXd;
using geom::kPi;
using geom::kTwoPi;

std::vector<int> enumerate_shape_variants(int wall_count) {
  if (wall_count == 4) return {0};
  if (wall_count == 6) return {0, 1, 2, 3, 4, 5};
  throw DomainError("unsupported wall count " + std::to_string(wall_count));
}

std::vector<double> corner_gap_angles(const maps::CornerSet& corners) {
  const int n = static_cast<int>(corners.size());
  if (corners.width <= 0) throw DomainError("corner set has no width");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double gap = geom::forward_column_gap(corners.corners[i].u, corners.corners[(i + 1) % n].u, corners.width);
    out[i] = kTwoPi * gap / corners.width;
  }
  return out;
}

double vertex_angle(const Vec2& a, const Vec2& b, const Vec2& camera) {
  const Vec2 p = a - camera;
  const Vec2 q = b - camera;
  const double cross = p.x() * q.y() - p.y() * q.x();
  return std::atan2(std::abs(cross), p.dot(q));
}

double topdown_energy(std::span<const Vec2> vertices, const Vec2& camera, std::span<const double> target_angles) {
  const std::size_t n = vertices.size();
  if (target_angles.size() != n) throw DomainError("target count does not match vertex count");
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = vertex_angle(vertices[i], vertices[(i + 1) % n], camera) - target_angles[i];
    e += r * r;
  }
  return e;
}

namespace {

Vec2 turn(const Vec2& d, bool reflex) { return reflex ? Vec2(-d.y(), d.x()) : Vec2(d.y(), -d.x()); }

}  // namespace

TopDownEnergy::TopDownEnergy(std::vector<double> target_angles, int variant)
    : targets_(std::move(target_angles)), variant_(variant) {
  const int n = wall_count();
  const auto variants = enumerate_shape_variants(n);
  if (std::find(variants.begin(), variants.end(), variant) == variants.end()) {
    throw DomainError("shape variant " + std::to_string(variant) + " out of range");
  }
  dir_.resize(n);
  axis_.resize(n);
  positive_.resize(n);
  free_.assign(n, -1);
  dir_[0] = Vec2(1.0, 0.0);
  for (int k = 1; k < n; ++k) dir_[k] = turn(dir_[k - 1], n == 6 && k == variant);
  for (int e = 0; e < n; ++e) {
    axis_[e] = e % 2;
    positive_[e] = dir_[e][axis_[e]] > 0.0;
  }
  bool first_negative[2] = {true, true};
  for (int e = 1; e < n; ++e) {
    if (!positive_[e] && first_negative[axis_[e]]) {
      first_negative[axis_[e]] = false;
      continue;
    }
    free_[e] = free_count_++;
  }
}

void TopDownEnergy::lengths(const VectorXd& p, std::vector<double>& q, std::vector<double>& len) const {
  const int n = wall_count();
  q.assign(n, 0.0);
  len.assign(n, 0.0);
  double sp[2] = {0.0, 0.0};
  double sm[2] = {0.0, 0.0};
  for (int e = 0; e < n; ++e) {
    if (free_[e] >= 0) q[e] = p[free_[e]];
    const double x = std::exp(q[e]);
    (positive_[e] ? sp : sm)[axis_[e]] += x;
    len[e] = x;
  }
  for (int e = 0; e < n; ++e) {
    if (!positive_[e]) len[e] *= sp[axis_[e]] / sm[axis_[e]];
  }
}

std::vector<Vec2> TopDownEnergy::vertices(const VectorXd& p) const {
  std::vector<double> q;
  std::vector<double> len;
  lengths(p, q, len);
  const int n = wall_count();
  std::vector<Vec2> v(n, Vec2::Zero());
  for (int k = 1; k < n; ++k) v[k] = v[k - 1] + len[k - 1] * dir_[k - 1];
  return v;
}

Vec2 TopDownEnergy::camera(const VectorXd& p) const { return {p[free_count_], p[free_count_ + 1]}; }

double TopDownEnergy::value(const VectorXd& p) const {
  const auto v = vertices(p);
  return topdown_energy(v, camera(p), targets_);
}

double TopDownEnergy::operator()(const VectorXd& p, VectorXd& grad) const {
  const int n = wall_count();
  std::vector<double> q;
  std::vector<double> len;
  lengths(p, q, len);
  std::vector<Vec2> v(n, Vec2::Zero());
  for (int k = 1; k < n; ++k) v[k] = v[k - 1] + len[k - 1] * dir_[k - 1];
  const Vec2 c = camera(p);

  grad.setZero(parameter_count());
  std::vector<Vec2> gv(n, Vec2::Zero());
  Vec2 gc = Vec2::Zero();
  double energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Vec2 a = v[i] - c;
    const Vec2 b = v[j] - c;
    const double aa = a.squaredNorm();
    const double bb = b.squaredNorm();
    if (aa < 1e-300 || bb < 1e-300) return std::numeric_limits<double>::infinity();
    const double cross = a.x() * b.y() - a.y() * b.x();
    const double beta = std::atan2(std::abs(cross), a.dot(b));
    const double r = beta - targets_[i];
    energy += r * r;
    const double s = cross >= 0.0 ? 1.0 : -1.0;
    const Vec2 da = -s * Vec2(-a.y(), a.x()) / aa;
    const Vec2 db = s * Vec2(-b.y(), b.x()) / bb;
    gv[i] += 2.0 * r * da;
    gv[j] += 2.0 * r * db;
    gc -= 2.0 * r * (da + db);
  }

  // dE/dlen_e: edge e moves every vertex after it (vertex 0 is pinned).
  std::vector<double> glen(n, 0.0);
  Vec2 suffix = Vec2::Zero();
  for (int k = n - 1; k >= 1; --k) {
    suffix += gv[k];
    glen[k - 1] = suffix.dot(dir_[k - 1]);
  }
  double sp[2] = {0.0, 0.0};
  double sm[2] = {0.0, 0.0};
  double gm[2] = {0.0, 0.0};
  for (int e = 0; e < n; ++e) {
    (positive_[e] ? sp : sm)[axis_[e]] += std::exp(q[e]);
    if (!positive_[e]) gm[axis_[e]] += glen[e] * len[e];
  }
  for (int e = 0; e < n; ++e) {
    if (free_[e] < 0) continue;
    const int g = axis_[e];
    const double x = std::exp(q[e]);
    grad[free_[e]] = positive_[e] ? glen[e] * len[e] + x / sp[g] * gm[g] : glen[e] * len[e] - x / sm[g] * gm[g];
  }
  grad[free_count_] = gc.x();
  grad[free_count_ + 1] = gc.y();
  return energy;
}

VectorXd TopDownEnergy::initial_shape() const {
  const int n = wall_count();
  std::vector<double> chord(n);
  for (int i = 0; i < n; ++i) chord[i] = 2.0 * std::sin(0.5 * std::clamp(targets_[i], 1e-6, kPi));
  double ref[2] = {chord[0], 0.0};
  for (int e = 1; e < n; ++e) {
    if (free_[e] < 0) ref[axis_[e]] = chord[e];
  }
  VectorXd p = VectorXd::Zero(parameter_count());
  for (int e = 0; e < n; ++e) {
    if (free_[e] < 0) continue;
    p[free_[e]] = std::log(chord[e] / (positive_[e] ? chord[0] : ref[axis_[e]]));
  }
  return p;
}

VectorXd TopDownEnergy::with_camera(VectorXd p, const Vec2& c) const {
  p[free_count_] = c.x();
  p[free_count_ + 1] = c.y();
  return p;
}

VectorXd TopDownEnergy::parameters_for(std::span<const Vec2> v, const Vec2& c) const {
  const int n = wall_count();
  if (static_cast<int>(v.size()) != n) throw DomainError("vertex count does not match wall count");
  std::vector<double> len(n);
  for (int e = 0; e < n; ++e) len[e] = (v[(e + 1) % n] - v[e]).norm();
  double ref[2] = {len[0], 0.0};
  for (int e = 1; e < n; ++e) {
    if (free_[e] < 0) ref[axis_[e]] = len[e];
  }
  VectorXd p = VectorXd::Zero(parameter_count());
  for (int e = 0; e < n; ++e) {
    if (free_[e] < 0) continue;
    p[free_[e]] = std::log(len[e] / (positive_[e] ? len[0] : ref[axis_[e]]));
  }
  return with_camera(std::move(p), c);
}

namespace {

bool acceptable(const std::vector<Vec2>& v, const Vec2& c) {
  for (const auto& p : v) {
    if (!p.allFinite()) return false;
  }
  return c.allFinite() && geom::is_simple_polygon(v) && geom::point_in_polygon(c, v);
}

Vec2 area_centroid(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  double a = 0.0;
  Vec2 acc = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    a += w;
    acc += w * (p + q);
  }
  if (std::abs(a) < 1e-300) return Vec2::Zero();
  return acc / (3.0 * a);
}

}  // namespace

TopDownSolution solve_topdown(const maps::CornerSet& corners, int wall_count, int variant,
                              const TopDownOptions& options) {
  (void)enumerate_shape_variants(wall_count);
  if (static_cast<int>(corners.size()) != wall_count) {
    throw DomainError("expected " + std::to_string(wall_count) + " corners, got " + std::to_string(corners.size()));
  }
  for (std::size_t i = 1; i < corners.size(); ++i) {
    if (!(corners.corners[i].u > corners.corners[i - 1].u)) throw DomainError("corner columns must increase");
  }
  const auto targets = corner_gap_angles(corners);
  for (double t : targets) {
    if (!(t > 0.0)) throw DomainError("coincident corner columns");
  }
  const TopDownEnergy energy(targets, variant);
  const VectorXd shape = energy.initial_shape();
  const auto v0 = energy.vertices(shape);

  // Candidate camera starts: vertex centroid, area centroid, then an interior grid.
  std::vector<Vec2> starts;
  Vec2 mean = Vec2::Zero();
  for (const auto& p : v0) mean += p;
  starts.push_back(mean / static_cast<double>(v0.size()));
  starts.push_back(area_centroid(v0));
  Vec2 lo = v0[0];
  Vec2 hi = v0[0];
  for (const auto& p : v0) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const int g = std::max(0, options.camera_grid);
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const Vec2 t((i + 0.5) / g, (j + 0.5) / g);
      starts.push_back(lo + t.cwiseProduct(hi - lo));
    }
  }
  std::vector<std::pair<double, Vec2>> ranked;
  for (const auto& c : starts) {
    if (!geom::point_in_polygon(c, v0)) continue;
    const double e = energy.value(energy.with_camera(shape, c));
    if (std::isfinite(e)) ranked.emplace_back(e, c);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (ranked.size() > 4) ranked.resize(4);
  if (ranked.empty()) ranked.emplace_back(0.0, starts.front());

  const Objective f = [&energy](const VectorXd& x, VectorXd& grad) { return energy(x, grad); };
  TopDownSolution best;
  bool found = false;
  for (const auto& [e0, c] : ranked) {
    const LbfgsResult r = minimize_lbfgs(f, energy.with_camera(shape, c), options.lbfgs);
    auto v = energy.vertices(r.x);
    const Vec2 cam = energy.camera(r.x);
    if (!acceptable(v, cam)) continue;
    if (!found || r.value < best.energy) {
      best.vertices = std::move(v);
      best.camera = cam;
      best.energy = r.value;
      best.converged = r.converged;
      best.iterations = r.iterations;
      best.variant = variant;
      found = true;
    }
    if (best.energy < 1e-20) break;
  }
  if (!found) throw Error(ErrorCode::invalid_layout, "no valid layout for shape variant " + std::to_string(variant));
  return best;
}

ManhattanLayout lift_to_3d(const TopDownSolution& topdown, const maps::CornerSet& corners, int width,
                           const LiftOptions& options) {
  const int n = static_cast<int>(topdown.vertices.size());
  if (static_cast<int>(corners.size()) != n) throw DomainError("corner count does not match layout");
  if (!(options.camera_height > 0.0)) throw DomainError("camera height must be positive");
  const double h = options.camera_height;

  // Rotate so each vertex sits at its corner's azimuth.
  double sx = 0.0;
  double sy = 0.0;
  std::vector<Vec2> rel(n);
  for (int i = 0; i < n; ++i) {
    rel[i] = topdown.vertices[i] - topdown.camera;
    const double psi = std::atan2(rel[i].x(), rel[i].y());
    const double d = geom::azimuth_of_column(corners.corners[i].u, width) - psi;
    sx += std::cos(d);
    sy += std::sin(d);
  }
  const double yaw = std::atan2(sy, sx);
  const double cy = std::cos(yaw);
  const double sn = std::sin(yaw);

  std::vector<double> dist(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double phi = geom::elevation_of_row(corners.corners[i].v_bot, width);
    if (!(phi < 0.0)) throw HorizonViolation("bottom corner " + std::to_string(i) + " is not below the horizon");
    dist[i] = h / std::tan(-phi);
    scale += dist[i] / rel[i].norm();
  }
  scale /= n;

  ManhattanLayout out;
  out.vertices.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec2& p = rel[i];
    out.vertices[i] = scale * Vec2(p.x() * cy + p.y() * sn, -p.x() * sn + p.y() * cy);
  }
  out.camera = Vec2::Zero();
  out.camera_height = h;
  out.floor = 0.0;
  double ceiling = 0.0;
  for (int i = 0; i < n; ++i) {
    ceiling += h + dist[i] * std::tan(geom::elevation_of_row(corners.corners[i].v_top, width));
  }
  out.ceiling = ceiling / n;
  validate(out);
  return out;
}

TopDownSolution normalize_layout(const ManhattanLayout& layout, int first) {
  const int n = layout.wall_count();
  if (n < 3 || first < 0 || first >= n) throw DomainError("bad vertex index");
  const Vec2 origin = layout.vertices[first];
  const Vec2 e0 = layout.vertices[(first + 1) % n] - origin;
  const double len = e0.norm();
  if (!(len > 0.0)) throw DomainError("zero-length edge");
  const double c = e0.x() / len;
  const double s = e0.y() / len;
  auto map = [&](const Vec2& p) {
    const Vec2 d = (p - origin) / len;
    return Vec2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  };
  TopDownSolution out;
  out.vertices.resize(n);
  for (int i = 0; i < n; ++i) out.vertices[i] = map(layout.vertices[(first + i) % n]);
  out.camera = map(layout.camera);
  out.converged = true;
  return out;
}

}  // namespace layoutkit::solver
