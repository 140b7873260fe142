#include "layoutkit/optimize.hpp"

#include "layoutkit/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace layoutkit::optimize {

using geom::Vec2;
using geom::Vec3;

void validate(const SamplerConfig& cfg) {
  if (!(cfg.wall_shift_fraction > 0.0 && cfg.wall_shift_fraction < 1.0)) {
    throw DomainError("wall_shift_fraction must lie in (0, 1)");
  }
  if (cfg.wall_samples < 1 || cfg.ceiling_samples < 1 || cfg.floor_samples < 1 || cfg.edge_sample_points < 1) {
    throw DomainError("sample counts must be at least 1");
  }
  if (!(cfg.prob_floor > 0.0 && cfg.prob_floor <= 1.0)) throw DomainError("prob_floor must lie in (0, 1]");
}

namespace {

double sample(const geom::EquirectImage& img, const ManhattanLayout& L, const Vec3& p, int c) {
  return img.sample(solver::project(L, p, img.width()), c);
}

double log_clamped(double p, double floor) { return std::log(std::clamp(p, floor, 1.0)); }

// Max (or mean) of a boundary channel along the straight 3D edge a-b.
template <typename Reduce>
double along_edge(const geom::EquirectImage& img, const ManhattanLayout& L, const Vec3& a, const Vec3& b, int c,
                  int n, Reduce reduce) {
  double acc = reduce.init;
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? 0.5 : static_cast<double>(k) / (n - 1);
    acc = reduce(acc, sample(img, L, a + t * (b - a), c));
  }
  return reduce.finish(acc, n);
}

struct Max {
  double init = -1.0;
  double operator()(double a, double b) const { return std::max(a, b); }
  double finish(double a, int) const { return a; }
};

struct Mean {
  double init = 0.0;
  double operator()(double a, double b) const { return a + b; }
  double finish(double a, int n) const { return a / n; }
};

}  // namespace

double score_layout(const ManhattanLayout& L, const maps::ProbMaps& maps, const ScoreWeights& w,
                    const SamplerConfig& cfg) {
  if (!geom::point_in_polygon(L.camera, L.vertices)) throw DomainError("camera outside the layout");
  const int n = L.wall_count();
  const auto& corner = maps.corner();
  const auto& boundary = maps.boundary();
  double junc = 0.0;
  double ceil = 0.0;
  double floor = 0.0;
  for (int i = 0; i < n; ++i) {
    junc += log_clamped(sample(corner, L, L.ceiling_corner(i), 0), cfg.prob_floor);
    junc += log_clamped(sample(corner, L, L.floor_corner(i), 0), cfg.prob_floor);
    const int j = (i + 1) % n;
    ceil += log_clamped(along_edge(boundary, L, L.ceiling_corner(i), L.ceiling_corner(j), maps::kCeilingWall,
                                   cfg.edge_sample_points, Max{}),
                        cfg.prob_floor);
    floor += log_clamped(along_edge(boundary, L, L.floor_corner(i), L.floor_corner(j), maps::kWallFloor,
                                    cfg.edge_sample_points, Max{}),
                         cfg.prob_floor);
  }
  return w.w_junc * junc + w.w_ceil * ceil + w.w_floor * floor;
}

std::vector<double> wall_confidence(const ManhattanLayout& L, const maps::ProbMaps& maps, const SamplerConfig& cfg) {
  const int n = L.wall_count();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = along_edge(maps.boundary(), L, L.ceiling_corner(i), L.ceiling_corner((i + 1) % n), maps::kCeilingWall,
                        cfg.edge_sample_points, Mean{});
  }
  return out;
}

std::vector<double> shift_grid(double f, int count) {
  if (count <= 1) return {0.0};
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = -f + 2.0 * f * k / (count - 1);
  return out;
}

OptimizeResult optimize_layout_detailed(const ManhattanLayout& initial, const maps::ProbMaps& maps,
                                        const SamplerConfig& cfg, const ScoreWeights& w) {
  validate(cfg);
  solver::validate(initial);
  OptimizeResult res;
  res.layout = initial;
  res.initial_score = score_layout(initial, maps, w, cfg);
  res.score = res.initial_score;

  const int n = initial.wall_count();
  const auto conf = wall_confidence(initial, maps, cfg);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return conf[a] < conf[b]; });

  const auto wall_shifts = shift_grid(cfg.wall_shift_fraction, cfg.wall_samples);
  const auto ceil_shifts = shift_grid(cfg.wall_shift_fraction, cfg.ceiling_samples);
  const auto floor_shifts = shift_grid(cfg.wall_shift_fraction, cfg.floor_samples);

  for (int i : order) {
    const ManhattanLayout base = res.layout;
    const Vec2 a = base.vertices[i];
    const Vec2 b = base.vertices[(i + 1) % n];
    const Vec2 e = (b - a).normalized();
    const Vec2 foot = a + (base.camera - a).dot(e) * e;
    const Vec2 outward = foot - base.camera;
    const double h = base.camera_height;
    for (double dw : wall_shifts) {
      ManhattanLayout cand = base;
      cand.vertices[i] = a + dw * outward;
      cand.vertices[(i + 1) % n] = b + dw * outward;
      if (solver::layout_violation(cand)) {
        res.skipped += static_cast<int>(ceil_shifts.size() * floor_shifts.size());
        continue;
      }
      for (double dc : ceil_shifts) {
        cand.ceiling = h + (base.ceiling - h) * (1.0 + dc);
        for (double df : floor_shifts) {
          cand.floor = h - (h - base.floor) * (1.0 + df);
          ++res.candidates;
          const double s = score_layout(cand, maps, w, cfg);
          if (s > res.score) {
            res.score = s;
            res.layout = cand;
          }
        }
      }
    }
  }
  return res;
}

}  // namespace layoutkit::optimize
