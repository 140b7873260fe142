#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layoutkit/lbfgs.hpp"
#include "layoutkit/maps.hpp"
#include "layoutkit/polygon.hpp"
#include "layoutkit/solver.hpp"

#include <cmath>
#include <random>

using namespace layoutkit;
using namespace layoutkit::solver;
using geom::kPi;
using geom::kTwoPi;

namespace {

constexpr int kW = 1024;

ManhattanLayout random_cuboid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> size(2.0, 8.0);
  std::uniform_real_distribution<double> frac(0.15, 0.85);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  std::uniform_real_distribution<double> hfrac(0.3, 0.7);
  for (;;) {
  CuboidParams d;
  d.s_w = size(rng);
  d.s_l = size(rng);
  d.s_h = std::uniform_real_distribution<double>(2.0, 4.0)(rng);
  d.t_x = (frac(rng) - 0.5) * d.s_w;
  d.t_z = (frac(rng) - 0.5) * d.s_l;
  d.r_theta = yaw(rng);
  const auto L = layout_from_params(d, hfrac(rng) * d.s_h);
  if (is_valid(L)) return L;
  }
}

// L-shaped room: a w x l rectangle with one corner notched, camera at origin.
ManhattanLayout l_room(double w, double l, double nw, double nl, Vec2 cam, double yaw_angle, double h_cam,
                       double ceiling) {
  ManhattanLayout L;
  L.vertices = {{0, 0}, {w, 0}, {w, l - nl}, {w - nw, l - nl}, {w - nw, l}, {0, l}};
  for (auto& v : L.vertices) v -= cam;
  L.camera = Vec2::Zero();
  L.camera_height = h_cam;
  L.floor = 0.0;
  L.ceiling = ceiling;
  L = yawed(oriented(L), yaw_angle);
  return L;
}

double max_vertex_error(const TopDownSolution& a, const TopDownSolution& b) {
  double err = (a.camera - b.camera).norm();
  for (std::size_t i = 0; i < a.vertices.size(); ++i) err = std::max(err, (a.vertices[i] - b.vertices[i]).norm());
  return err;
}

maps::CornerSet square_corners() {
  maps::CornerSet cs;
  cs.width = kW;
  for (int k : {1, 3, 5, 7}) cs.corners.push_back({kW * k / 8.0 - 0.5, 160.0, 352.0, 1.0, 1.0});
  return cs;
}

}  // namespace

TEST_CASE("shape variant enumeration") {
  CHECK(enumerate_shape_variants(4).size() == 1);
  CHECK(enumerate_shape_variants(6) == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS((void)enumerate_shape_variants(5), DomainError);
  CHECK_THROWS_AS((void)enumerate_shape_variants(8), DomainError);
}

TEST_CASE("square room from eighth columns") {
  const auto cs = square_corners();
  for (double a : corner_gap_angles(cs)) CHECK(a == doctest::Approx(kPi / 2).epsilon(1e-15));
  const auto sol = solve_topdown(cs, 4, 0);
  CHECK(sol.energy < 1e-10);
  CHECK(sol.vertices[1].x() == doctest::Approx(1.0));
  CHECK(sol.camera.x() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.camera.y() == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK((sol.vertices[2] - sol.vertices[1]).norm() == doctest::Approx(1.0).epsilon(1e-6));
  // Exact square with the camera at its centre has zero energy.
  const std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, -1}, {0, -1}};
  CHECK(vertex_angle(sq[0], sq[1], {0.5, -0.5}) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(topdown_energy(sq, {0.5, -0.5}, corner_gap_angles(cs)) < 1e-28);
}

TEST_CASE("corner count mismatch is a domain error") {
  auto cs = square_corners();
  CHECK_THROWS_AS((void)solve_topdown(cs, 6, 0), DomainError);
  cs.corners.pop_back();
  CHECK_THROWS_AS((void)solve_topdown(cs, 4, 0), DomainError);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uq(-0.7, 0.7);
  std::uniform_real_distribution<double> ut(0.4, 1.6);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial % 2 ? 6 : 4;
    const int variant = n == 6 ? trial % 6 : 0;
    std::vector<double> t(n);
    double sum = 0;
    for (auto& x : t) sum += (x = ut(rng));
    for (auto& x : t) x *= kTwoPi / sum;
    const TopDownEnergy E(t, variant);
    Eigen::VectorXd p = E.initial_shape();
    for (int i = 0; i < p.size(); ++i) p[i] += uq(rng);
    const auto v = E.vertices(p);
    Vec2 c = Vec2::Zero();
    for (const auto& q : v) c += q;
    p = E.with_camera(p, c / n + Vec2(0.05 * uq(rng), 0.05 * uq(rng)));
    Eigen::VectorXd g;
    E(p, g);
    const double h = 1e-6;
    Eigen::VectorXd fd(p.size());
    for (int i = 0; i < p.size(); ++i) {
      Eigen::VectorXd a = p;
      Eigen::VectorXd b = p;
      a[i] += h;
      b[i] -= h;
      fd[i] = (E.value(a) - E.value(b)) / (2 * h);
    }
    const double rel = (g - fd).norm() / std::max(1e-12, fd.norm());
    CHECK(rel < 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("energy is invariant to a global column roll") {
  auto cs = square_corners();
  cs.corners[1].u += 37.25;
  const auto a = corner_gap_angles(cs);
  for (auto& c : cs.corners) c.u = std::fmod(c.u + 300.0, kW);
  std::sort(cs.corners.begin(), cs.corners.end(), [](auto& x, auto& y) { return x.u < y.u; });
  auto b = corner_gap_angles(cs);
  std::rotate(b.begin(), b.begin() + 3, b.end());
  std::vector<double> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-12));
}

TEST_CASE("random cuboids are recovered up to similarity") {
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto L = random_cuboid(rng);
    const auto cs = project_corners(L, kW);
    const auto truth = normalize_layout(L, first_vertex_by_column(L, kW));
    CHECK(topdown_energy(truth.vertices, truth.camera, corner_gap_angles(cs)) < 1e-10);
    const auto sol = solve_topdown(cs, 4, 0);
    worst = std::max(worst, max_vertex_error(sol, truth));
  }
  MESSAGE("worst cuboid vertex error " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("L-shaped rooms: correct variant fits, wrong variants do not") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> size(3.0, 8.0);
  std::uniform_real_distribution<double> notch(0.25, 0.6);
  std::uniform_real_distribution<double> yaw(-kPi, kPi);
  int rooms = 0;
  while (rooms < 20) {
    const double w = size(rng), l = size(rng), nw = notch(rng) * w, nl = notch(rng) * l;
    // Camera inside the kernel so every corner is visible.
    const Vec2 cam(notch(rng) * (w - nw), notch(rng) * (l - nl));
    const auto L = l_room(w, l, nw, nl, cam, yaw(rng), 1.2, 2.8);
    if (!is_valid(L)) continue;
    const auto cs = project_corners(L, kW);
    bool separated = true;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      separated &= geom::forward_column_gap(cs.corners[i].u, cs.corners[(i + 1) % cs.size()].u, kW) > 24;
    }
    if (!separated) continue;
    ++rooms;
    const int first = first_vertex_by_column(L, kW);
    const auto reflex = reflex_vertices(L);
    REQUIRE(reflex.size() == 1);
    const int correct = (reflex[0] - first + 6) % 6;
    const auto truth = normalize_layout(L, first);
    CHECK(topdown_energy(truth.vertices, truth.camera, corner_gap_angles(cs)) < 1e-10);
    const auto good = solve_topdown(cs, 6, correct);
    CHECK(good.energy < 1e-6);
    CHECK(max_vertex_error(good, truth) < 1e-3);
    for (int k = 0; k < 6; ++k) {
      if (k == correct) continue;
      try {
        const auto bad = solve_topdown(cs, 6, k);
        CHECK(bad.energy >= 10 * std::max(good.energy, 1e-12));
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_layout);
      }
    }
  }
}

TEST_CASE("variants give distinct layouts") {
  const auto L = l_room(6, 5, 2.5, 2, {1.5, 1.5}, 0.3, 1.4, 3.0);
  const auto cs = project_corners(L, kW);
  std::vector<std::vector<Vec2>> sols;
  for (int k : enumerate_shape_variants(6)) {
    try {
      sols.push_back(solve_topdown(cs, 6, k).vertices);
    } catch (const Error&) {
    }
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      double d = 0;
      for (std::size_t m = 0; m < 6; ++m) d = std::max(d, (sols[i][m] - sols[j][m]).norm());
      CHECK(d > 1e-3);
    }
  }
}

TEST_CASE("solutions are valid polygons around the camera") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto L = random_cuboid(rng);
    const auto sol = solve_topdown(project_corners(L, kW), 4, 0);
    CHECK(geom::is_simple_polygon(sol.vertices));
    CHECK(geom::point_in_polygon(sol.camera, sol.vertices));
  }
}

TEST_CASE("lift closed forms") {
  // Unit-distance square corners at -45 degrees below and +30 degrees above the horizon.
  TopDownSolution td;
  td.vertices = {{0, 0}, {1, 0}, {1, -1}, {0, -1}};
  td.camera = {0.5, -0.5};
  maps::CornerSet cs;
  cs.width = kW;
  const double v_bot = geom::row_of_elevation(-kPi / 4, kW);
  const double v_top = geom::row_of_elevation(kPi / 6, kW);
  for (int k : {1, 3, 5, 7}) cs.corners.push_back({kW * k / 8.0 - 0.5, v_top, v_bot, 1, 1});
  const auto L = lift_to_3d(td, cs, kW);
  CHECK(L.camera_height == 1.0);
  CHECK(L.floor == 0.0);
  for (const auto& v : L.vertices) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(L.ceiling == doctest::Approx(1.0 + std::tan(kPi / 6)).epsilon(1e-9));
  CHECK(L.ceiling == doctest::Approx(1.5774).epsilon(1e-4));

  auto bad = cs;
  bad.corners[2].v_bot = geom::row_of_elevation(0.01, kW);
  CHECK_THROWS_AS((void)lift_to_3d(td, bad, kW), HorizonViolation);
}

TEST_CASE("lift recovers geometry up to camera-height scale") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto L = random_cuboid(rng);
    const auto cs = project_corners(L, kW);
    const auto sol = solve_topdown(cs, 4, 0);
    const auto out = lift_to_3d(sol, cs, kW, {L.camera_height});
    CHECK(out.ceiling == doctest::Approx(L.ceiling).epsilon(1e-6));
    const int first = first_vertex_by_column(L, kW);
    for (int i = 0; i < 4; ++i) CHECK((out.vertices[i] - L.vertices[(first + i) % 4]).norm() < 1e-4);
  }
}

TEST_CASE("lbfgs minimizes the Rosenbrock function") {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  const auto r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0));
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lbfgs flags non-convergence and keeps the best iterate") {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  LbfgsOptions o;
  o.max_iterations = 3;
  const auto r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK_FALSE(r.converged);
  CHECK(r.value < 24.2);
}

TEST_CASE("cuboid parameters round-trip exactly") {
  const CuboidParams d{2, 3, 1.5, 0.2, -0.1, 0.1};
  const auto back = params_from_layout(layout_from_params(d, 0.7));
  const auto a = d.as_array();
  const auto b = back.as_array();
  for (int i = 0; i < 6; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    CuboidParams r{1 + 5 * u(rng), 1 + 5 * u(rng), 2 + 2 * u(rng), 0.4 * u(rng) - 0.2, 0.4 * u(rng) - 0.2,
                   (u(rng) - 0.5) * kPi / 2 * 0.999};
    const auto q = params_from_layout(layout_from_params(r, 1.0)).as_array();
    const auto p = r.as_array();
    for (int i = 0; i < 6; ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-12);
  }
}

TEST_CASE("zero rotation and offset give a centred axis-aligned rectangle") {
  const auto L = layout_from_params({4, 2, 3, 0, 0, 0}, 1.2);
  REQUIRE(L.wall_count() == 4);
  for (const auto& v : L.vertices) {
    CHECK(std::abs(v.x()) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(std::abs(v.y()) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(L.floor == 0.0);
  CHECK(L.ceiling == 3.0);
  CHECK(L.camera_height == 1.2);
  CHECK(L.camera == Vec2::Zero());
}

TEST_CASE("a quarter-pi rotation canonicalizes with swapped sides") {
  const CuboidParams d{2, 5, 3, 0.3, 0.1, kPi / 4};
  const auto c = canonical(d);
  CHECK(c.r_theta == doctest::Approx(-kPi / 4).epsilon(1e-12));
  CHECK(c.s_w == 5);
  CHECK(c.s_l == 2);
  const auto back = params_from_layout(layout_from_params(d, 1.0));
  CHECK(back.r_theta == doctest::Approx(-kPi / 4).epsilon(1e-12));
  CHECK(back.s_w == doctest::Approx(5).epsilon(1e-12));
  CHECK(back.s_l == doctest::Approx(2).epsilon(1e-12));
  // same geometry either way
  const auto a = layout_from_params(d, 1.0);
  const auto b = layout_from_params(c, 1.0);
  for (const auto& v : a.vertices) {
    double best = 1e9;
    for (const auto& w : b.vertices) best = std::min(best, (v - w).norm());
    CHECK(best < 1e-12);
  }
}

TEST_CASE("non-cuboid layouts have no cuboid parameters") {
  const auto L = l_room(5, 4, 2, 2, {1.5, 1.5}, 0.2, 1.0, 2.5);
  CHECK_THROWS_AS((void)params_from_layout(L), DomainError);
  auto skew = layout_from_params({3, 3, 2, 0, 0, 0}, 1.0);
  skew.vertices[0] += Vec2(0.3, 0.0);
  CHECK_THROWS_AS((void)params_from_layout(skew), DomainError);
}

TEST_CASE("render, extract, solve and lift recovers the ceiling within 0.5%") {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto L = random_cuboid(rng);
    const auto m = maps::render_ground_truth(L, kW);
    const auto cs = maps::strongest(maps::extract_corners(m.corner()), 4);
    const auto sol = solve_topdown(cs, 4, 0);
    const auto out = lift_to_3d(sol, cs, kW, {L.camera_height});
    worst = std::max(worst, std::abs(out.ceiling - L.ceiling) / (L.ceiling - L.floor));
  }
  MESSAGE("worst relative ceiling error " << worst);
  CHECK(worst < 0.005);
}
