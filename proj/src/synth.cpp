#include "layoutkit/synth.hpp"

#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace layoutkit::synth {

using geom::kPi;
using geom::kTwoPi;
using geom::Vec2;
using geom::Vec3;

namespace {

constexpr int kMaxAttempts = 10000;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<Vec2> footprint(const RoomSpec& s) {
  const double w = s.width;
  const double l = s.length;
  if (s.wall_count == 4) return {{0, 0}, {w, 0}, {w, l}, {0, l}};
  const double x = w - s.notch_width;
  const double z = l - s.notch_length;
  return {{0, 0}, {w, 0}, {w, z}, {x, z}, {x, l}, {0, l}};
}

bool corners_separated(const ManhattanLayout& L) {
  constexpr int kRefWidth = 1024;
  const auto cs = solver::project_corners(L, kRefWidth);
  const std::size_t n = cs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (geom::forward_column_gap(cs.corners[i].u, cs.corners[(i + 1) % n].u, kRefWidth) < kMinCornerGapPixels) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::pair<RoomSpec, ManhattanLayout> gen_room(std::uint64_t seed, int wall_count) {
  if (wall_count != 4 && wall_count != 6) throw DomainError("wall count must be 4 or 6");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RoomSpec s;
    s.seed = seed;
    s.wall_count = wall_count;
    s.width = uniform(rng, 2.0, 8.0);
    s.length = uniform(rng, 2.0, 8.0);
    s.height = uniform(rng, 2.0, 4.0);
    s.camera_height_fraction = uniform(rng, 0.3, 0.7);
    s.yaw = uniform(rng, -kPi, kPi);
    double cx_max = s.width - kMinWallDistance;
    double cz_max = s.length - kMinWallDistance;
    if (wall_count == 6) {
      s.notch_width = uniform(rng, 0.25, 0.6) * s.width;
      s.notch_length = uniform(rng, 0.25, 0.6) * s.length;
      // Kernel of the L: the camera must see the reflex corner's both sides.
      cx_max = s.width - s.notch_width;
      cz_max = s.length - s.notch_length;
    }
    if (cx_max <= kMinWallDistance || cz_max <= kMinWallDistance) continue;
    s.camera = {uniform(rng, kMinWallDistance, cx_max), uniform(rng, kMinWallDistance, cz_max)};

    const auto poly = footprint(s);
    if (!geom::point_in_polygon(s.camera, poly) || geom::distance_to_boundary(s.camera, poly) < kMinWallDistance) {
      continue;
    }
    if (wall_count == 6 && !(s.camera.x() < cx_max && s.camera.y() < cz_max)) continue;

    ManhattanLayout L;
    for (const auto& p : poly) L.vertices.push_back(p - s.camera);
    L.camera = Vec2::Zero();
    L.floor = 0.0;
    L.ceiling = s.height;
    L.camera_height = s.camera_height_fraction * s.height;
    L = solver::yawed(solver::oriented(std::move(L)), s.yaw);
    if (!solver::is_valid(L) || !corners_separated(L)) continue;
    return {s, L};
  }
  throw Error(ErrorCode::invalid_layout, "room generation exhausted its attempts for seed " + std::to_string(seed));
}

maps::ProbMaps corrupt_maps(const maps::ProbMaps& in, double blur_sigma, double noise_sigma, double dropout,
                            std::uint64_t seed) {
  if (!(blur_sigma >= 0.0 && noise_sigma >= 0.0 && dropout >= 0.0 && dropout < 1.0)) {
    throw DomainError("corruption parameters must be non-negative with dropout < 1");
  }
  std::mt19937_64 rng(seed);
  geom::Raster corner = in.corner();
  geom::Raster boundary = in.boundary();

  if (dropout > 0.0) {
    const auto blobs = maps::label_blobs(corner, 0);
    const int drop = static_cast<int>(std::lround(dropout * blobs.count));
    std::vector<int> ids(blobs.count);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<bool> gone(blobs.count, false);
    for (int i = 0; i < drop; ++i) gone[ids[i]] = true;
    for (std::size_t i = 0; i < blobs.label.size(); ++i) {
      if (blobs.label[i] >= 0 && gone[blobs.label[i]]) corner.data()[i] = 0.0f;
    }
  }
  if (blur_sigma > 0.0) {
    const int taps = 2 * static_cast<int>(std::ceil(3.0 * blur_sigma)) + 1;
    corner = maps::gaussian_blur(corner, blur_sigma, taps);
    boundary = maps::gaussian_blur(boundary, blur_sigma, taps);
  }
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (geom::Raster* r : {&boundary, &corner}) {
      for (float& v : r->data()) v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
    }
  }
  for (geom::Raster* r : {&boundary, &corner}) {
    for (float& v : r->data()) v = std::clamp(v, 0.0f, 1.0f);
  }
  return maps::ProbMaps(geom::EquirectImage(std::move(boundary)), geom::EquirectImage(std::move(corner)));
}

namespace {

struct Arc {
  Vec3 a;
  Vec3 b;
  Vec3 n;
};

void add_segment(std::vector<Arc>& arcs, const Vec3& p, const Vec3& q, const geom::Rotation3& R) {
  const Vec3 a = (R * p).normalized();
  const Vec3 b = (R * q).normalized();
  const Vec3 n = a.cross(b);
  if (n.norm() < 1e-9) return;
  arcs.push_back({a, b, n.normalized()});
}

double arc_distance(const Vec3& d, const Arc& s) {
  const double off = d.dot(s.n);
  const Vec3 q = d - off * s.n;
  if (s.a.cross(q).dot(s.n) >= 0.0 && q.cross(s.b).dot(s.n) >= 0.0) return std::asin(std::min(1.0, std::abs(off)));
  const double da = std::acos(std::clamp(d.dot(s.a), -1.0, 1.0));
  const double db = std::acos(std::clamp(d.dot(s.b), -1.0, 1.0));
  return std::min(da, db);
}

}  // namespace

geom::EquirectImage render_wireframe_panorama(const ManhattanLayout& L, int width, const geom::Rotation3& R,
                                              const WireframeOptions& opt) {
  solver::validate(L);
  geom::EquirectImage img(width, 1, static_cast<float>(opt.background));
  const Vec3 cam = L.camera_position();
  const int n = L.wall_count();
  std::vector<Arc> arcs;
  const double span = L.ceiling - L.floor;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Vec3 f0 = L.floor_corner(i) - cam;
    const Vec3 f1 = L.floor_corner(j) - cam;
    const Vec3 c0 = L.ceiling_corner(i) - cam;
    const Vec3 c1 = L.ceiling_corner(j) - cam;
    add_segment(arcs, f0, c0, R);
    add_segment(arcs, f0, f1, R);
    add_segment(arcs, c0, c1, R);
    if (!opt.extra_lines) continue;
    const Vec3 up(0.0, span, 0.0);
    for (double t : {0.3, 0.7}) {
      // Horizontal rails and door-like verticals on every wall.
      add_segment(arcs, f0 + 0.15 * (f1 - f0) + t * up, f0 + 0.85 * (f1 - f0) + t * up, R);
      const Vec3 base = f0 + t * (f1 - f0);
      add_segment(arcs, base, base + 0.7 * up, R);
    }
  }

  const double px = width / kTwoPi;
  const double cutoff = 4.0 * opt.line_sigma / px;
  const double sin_cut = std::sin(cutoff);
  const double inv2s2 = 1.0 / (2.0 * opt.line_sigma * opt.line_sigma);
  const float amp = static_cast<float>(opt.foreground - opt.background);
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < width; ++u) {
      const Vec3 d = geom::pix_to_dir(u, v, width).vec();
      double best = 0.0;
      for (const auto& s : arcs) {
        if (std::abs(d.dot(s.n)) > sin_cut) continue;
        const double dist = arc_distance(d, s) * px;
        best = std::max(best, std::exp(-dist * dist * inv2s2));
      }
      img.at(u, v) += amp * static_cast<float>(best);
    }
  }
  return img;
}

}  // namespace layoutkit::synth
