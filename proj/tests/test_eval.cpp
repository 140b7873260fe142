#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layoutkit/eval.hpp"
#include "layoutkit/polygon.hpp"
#include "layoutkit/synth.hpp"

#include <cmath>
#include <random>

using namespace layoutkit;
using namespace layoutkit::eval;
using geom::Vec2;

namespace {

constexpr int kW = 1024;
const double kDiag = std::sqrt(1024.0 * 1024.0 + 512.0 * 512.0);

ManhattanLayout box(double x0, double z0, double x1, double z1, double floor, double ceiling, Vec2 cam) {
  ManhattanLayout L;
  L.vertices = {{x0, z0}, {x0, z1}, {x1, z1}, {x1, z0}};
  L = solver::oriented(L);
  L.camera = cam;
  L.floor = floor;
  L.ceiling = ceiling;
  L.camera_height = 0.5 * (floor + ceiling);
  return L;
}

maps::CornerSet columns(std::initializer_list<std::array<double, 3>> cs) {
  maps::CornerSet out;
  out.width = kW;
  for (const auto& c : cs) out.corners.push_back({c[0], c[1], c[2], 1.0, 0.0});
  return out;
}

// Independent labelling: intersect each pixel ray with the ceiling/floor plane
// and test the hit point against the footprint.
std::vector<Surface> brute_labels(const ManhattanLayout& L, int width) {
  const int h = width / 2;
  std::vector<Surface> out(static_cast<std::size_t>(width) * h, Surface::wall);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < width; ++u) {
      const geom::Vec3 d = geom::pix_to_dir(u, v, width).vec();
      Surface s = Surface::wall;
      const double plane = d.y() > 0 ? L.ceiling : L.floor;
      const double t = (plane - L.camera_height) / d.y();
      if (std::abs(d.y()) > 1e-12 && t > 0) {
        const Vec2 hit = L.camera + t * Vec2(d.x(), d.z());
        if (geom::point_in_polygon(hit, L.vertices)) s = d.y() > 0 ? Surface::ceiling : Surface::floor;
      }
      out[static_cast<std::size_t>(v) * width + u] = s;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("iou3d identity and the half-shifted unit cube") {
  const auto cube = box(0, 0, 1, 1, 0, 1, Vec2(0.5, 0.5));
  CHECK(iou3d(cube, cube) == doctest::Approx(1.0).epsilon(1e-12));
  const auto shifted = box(0.5, 0, 1.5, 1, 0, 1, Vec2(1.0, 0.5));
  CHECK(std::abs(iou3d(cube, shifted) - 1.0 / 3.0) <= 0.005);
}

TEST_CASE("iou3d agrees with exact clipping on convex cases") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::uniform_real_distribution<double> ang(-geom::kPi, geom::kPi);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double ax = u(rng);
    const double az = u(rng);
    const double bx = ax + u(rng) - 1.0;
    const double bz = az + u(rng) - 1.0;
    auto A = box(ax, az, ax + 1 + u(rng), az + 1 + u(rng), 0.0, 2.0 + u(rng), Vec2(ax + 0.5, az + 0.5));
    auto B = box(bx, bz, bx + 1 + u(rng), bz + 1 + u(rng), 0.2, 2.5 + u(rng), Vec2(bx + 0.5, bz + 0.5));
    if (i % 2) {
      // rotated copies of both footprints keep the convex oracle valid
      const double r = ang(rng);
      const Eigen::Rotation2Dd rot(r);
      for (auto* L : {&A, &B})
        for (auto& v : L->vertices) v = rot * v;
    }
    const double inter = geom::polygon_area(geom::clip_convex(A.vertices, B.vertices));
    const double hi = std::max(0.0, std::min(A.ceiling, B.ceiling) - std::max(A.floor, B.floor));
    const double va = geom::polygon_area(A.vertices) * (A.ceiling - A.floor);
    const double vb = geom::polygon_area(B.vertices) * (B.ceiling - B.floor);
    const double exact = inter * hi / (va + vb - inter * hi);
    const double got = iou3d(A, B);
    worst = std::max(worst, std::abs(got - exact));
  }
  MESSAGE("worst raster deviation " << worst);
  CHECK(worst <= 0.005);
}

TEST_CASE("iou3d rejects zero-height layouts") {
  const auto flat = box(0, 0, 1, 1, 1, 1, Vec2(0.5, 0.5));
  const auto cube = box(0, 0, 1, 1, 0, 1, Vec2(0.5, 0.5));
  CHECK_THROWS_AS((void)iou3d(flat, cube), DomainError);
  CHECK_THROWS_AS((void)iou3d(cube, flat), DomainError);
}

TEST_CASE("corner error closed forms") {
  const auto gt = columns({{100, 200, 300}, {300, 210, 290}, {600, 190, 320}, {900, 205, 305}});
  CHECK(corner_error(gt, gt, kW).percent == 0.0);

  auto moved = gt;
  moved.corners[1].v_top += 50.0;
  CHECK(corner_error(moved, gt, kW).percent == doctest::Approx(50.0 / kDiag / 8 * 100).epsilon(1e-9));
  CHECK(corner_error(moved, gt, kW).percent == doctest::Approx(0.546).epsilon(1e-3));

  auto both = gt;
  both.corners[2].u += 30.0;
  both.corners[2].v_top += 40.0;
  both.corners[2].v_bot += 40.0;
  CHECK(corner_error(both, gt, kW).percent == doctest::Approx(2 * 50.0 / kDiag / 8 * 100).epsilon(1e-9));
}

TEST_CASE("corner error pads missing predictions at the image centre") {
  const auto gt = columns({{100, 200, 300}, {300, 210, 290}, {600, 190, 320}, {900, 205, 305}});
  auto pred = gt;
  pred.corners.erase(pred.corners.begin() + 2);
  const auto r = corner_error(pred, gt, kW);
  CHECK(r.padded == 1);
  const double pad = std::hypot(600 - 512.0, 190 - 256.0) + std::hypot(600 - 512.0, 320 - 256.0);
  CHECK(r.percent == doctest::Approx(pad / 8 / kDiag * 100).epsilon(1e-9));

  auto extra = gt;
  extra.corners.push_back({1000, 200, 300, 1.0, 0.0});
  const auto e = corner_error(extra, gt, kW);
  CHECK(e.skipped == 1);
  CHECK(e.percent == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)corner_error(gt, maps::CornerSet{}, kW), DomainError);
}

TEST_CASE("corner error matching wraps around the seam") {
  const auto gt = columns({{2, 200, 300}, {300, 210, 290}, {600, 190, 320}, {900, 205, 305}});
  auto pred = gt;
  pred.corners[0].u = 1020;  // 6 px to the left, across the seam
  std::rotate(pred.corners.begin(), pred.corners.begin() + 1, pred.corners.end());
  CHECK(corner_error(pred, gt, kW).percent == doctest::Approx(2 * 6.0 / 8 / kDiag * 100).epsilon(1e-9));
}

TEST_CASE("corner error is unchanged when both sets roll together") {
  const auto [s1, A] = synth::gen_room(11, 4);
  const auto [s2, B] = synth::gen_room(12, 4);
  const double base = corner_error(A, B, kW).percent;
  for (double k : {37.0, 400.0, 811.0}) {
    const double rolled = corner_error(solver::yawed(A, k * geom::kTwoPi / kW), solver::yawed(B, k * geom::kTwoPi / kW), kW).percent;
    CHECK(rolled == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("moving a predicted corner away never lowers the error") {
  const auto gt = columns({{100, 200, 300}, {300, 210, 290}, {600, 190, 320}, {900, 205, 305}});
  auto pred = gt;
  double last = 0.0;
  for (int step = 1; step <= 20; ++step) {
    pred.corners[1].v_top = 210 - 3.0 * step;
    const double e = corner_error(pred, gt, kW).percent;
    CHECK(e >= last);
    last = e;
  }
}

TEST_CASE("pixel labels match a brute-force ray cast") {
  for (int s = 0; s < 6; ++s) {
    const auto [spec, L] = synth::gen_room(30 + s, s % 2 ? 6 : 4);
    const auto a = surface_labels(L, 256);
    const auto b = brute_labels(L, 256);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
    CHECK(diff <= 2);
  }
}

TEST_CASE("raising the ceiling flips exactly the pixels between the two boundaries") {
  const auto [spec, L] = synth::gen_room(40, 4);
  auto raised = L;
  raised.ceiling += 0.4;
  const auto a = surface_labels(L, kW);
  const auto b = surface_labels(raised, kW);
  std::size_t between = 0;
  std::size_t reversed = 0;
  for (int u = 0; u < kW; ++u) {
    for (int v = 0; v < kW / 2; ++v) {
      const std::size_t i = static_cast<std::size_t>(v) * kW + u;
      between += a[i] == Surface::ceiling && b[i] == Surface::wall;
      reversed += a[i] == Surface::wall && b[i] == Surface::ceiling;
    }
  }
  CHECK(between > 0);
  CHECK(reversed == 0);
  CHECK(pixel_error(raised, L, kW) == doctest::Approx(100.0 * between / (kW * kW / 2.0)).epsilon(1e-12));
}

TEST_CASE("a 180 degree yaw rolls the labels by half the width") {
  const auto [spec, L] = synth::gen_room(42, 6);
  const auto a = surface_labels(L, 512);
  const auto b = surface_labels(solver::yawed(L, geom::kPi), 512);
  std::size_t diff = 0;
  for (int v = 0; v < 256; ++v)
    for (int u = 0; u < 512; ++u) diff += a[v * 512 + u] != b[v * 512 + (u + 256) % 512];
  CHECK(diff == 0);
}

TEST_CASE("metric invariants over 1000 random pairs") {
  for (int i = 0; i < 1000; ++i) {
    const auto [sa, A] = synth::gen_room(2 * i, i % 3 ? 4 : 6);
    const auto [sb, B] = synth::gen_room(2 * i + 1, i % 5 ? 4 : 6);
    const double ab = iou3d(A, B);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ab == iou3d(B, A));
    CHECK(iou3d(A, A) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(corner_error(A, A, 256).percent == 0.0);
    if (i % 10 == 0) {
      CHECK(pixel_error(A, B, 256) == pixel_error(B, A, 256));
      CHECK(pixel_error(A, A, 256) == 0.0);
    }
  }
}
