#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layoutkit/align.hpp"
#include "layoutkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace layoutkit;
using namespace layoutkit::align;
using geom::kPi;

namespace {

constexpr double kDeg = kPi / 180.0;

// Axes of the room's Manhattan frame as they appear after the scene rotation.
std::array<Vec3, 3> true_axes(const solver::ManhattanLayout& L, const Rotation3& R) {
  const Rotation3 frame = R * Rotation3::yaw(-solver::manhattan_yaw(L));
  return {frame * Vec3::UnitX(), frame * Vec3::UnitY(), frame * Vec3::UnitZ()};
}

double axis_error(const VanishingBasis& b, const std::array<Vec3, 3>& truth) {
  double worst = 0.0;
  for (const auto& t : truth) {
    double best = 0.0;
    for (const auto& a : b.axes) best = std::max(best, std::abs(a.vec().dot(t)));
    worst = std::max(worst, std::acos(std::min(1.0, best)));
  }
  return worst;
}

// Segments of lines parallel to the given axes, seen from the origin.
std::vector<LineSegment> manhattan_segments(const std::array<Vec3, 3>& axes, int per_axis, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-4.0, 4.0);
  std::uniform_real_distribution<double> len(0.5, 2.0);
  std::vector<LineSegment> out;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < per_axis; ++i) {
      const Vec3 p(pos(rng), pos(rng), pos(rng));
      if (p.norm() < 1.0) continue;
      const Vec3 q = p + len(rng) * axes[k];
      out.push_back(make_segment(p, q, 1.0));
    }
  }
  return out;
}

geom::Raster line_image(int size, Vec2 a, Vec2 b) {
  geom::Raster img(size, size, 1, 1.0f);
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
    img.at(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y()))) = 0.0f;
  }
  return img;
}

}  // namespace

TEST_CASE("a single dark line gives one segment") {
  for (const auto& [a, b] : std::vector<std::pair<Vec2, Vec2>>{{{20.5, 40.5}, {70.5, 40.5}},
                                                               {{30.5, 20.5}, {30.5, 70.5}},
                                                               {{20.5, 20.5}, {55.85, 55.85}}}) {
    const auto segs = detect_image_segments(line_image(100, a, b), 8.0);
    REQUIRE(segs.size() == 1);
    const auto& s = segs[0];
    const double d1 = std::max((s.p0 - a).norm(), (s.p1 - b).norm());
    const double d2 = std::max((s.p0 - b).norm(), (s.p1 - a).norm());
    CHECK(std::min(d1, d2) <= 2.0);
  }
}

TEST_CASE("constant image has no segments") {
  CHECK(detect_image_segments(geom::Raster(64, 64, 1, 0.4f), 8.0).empty());
  CHECK_THROWS_AS((void)detect_image_segments(geom::Raster(64, 64, 3, 0.4f), 8.0), DomainError);
  geom::PerspectiveView view{geom::Raster(64, 64, 1, 0.4f), geom::PerspectiveCamera::looking_at(Direction3(0, 0, 1), 1.0, 64)};
  CHECK_THROWS_AS((void)detect_segments(view, 4.0), DomainError);
}

TEST_CASE("segments on the sphere") {
  const auto s = make_segment(Vec3(1, 0, 0), Vec3(0, 0, 2));
  CHECK(s.length == doctest::Approx(kPi / 2));
  CHECK(std::abs(s.normal.dot(s.a)) < 1e-12);
  CHECK(std::abs(s.normal.dot(s.b)) < 1e-12);
  CHECK_THROWS_AS((void)make_segment(Vec3(1, 0, 0), Vec3(2, 0, 0)), DomainError);
}

TEST_CASE("wireframe view segments are orthogonal to a room axis") {
  const auto [spec, L] = synth::gen_room(2, 4);
  const Rotation3 R = Rotation3::pitch(8 * kDeg) * Rotation3::roll(-5 * kDeg);
  const auto pano = synth::render_wireframe_panorama(L, 1024, R);
  const auto axes = true_axes(L, R);
  int total = 0;
  for (int k = 0; k < 6; ++k) {
    const double yaw = geom::kTwoPi * k / 6;
    const auto view = geom::extract_perspective_view(pano, Direction3(std::sin(yaw), 0, std::cos(yaw)), kPi / 2, 256);
    for (const auto& s : detect_segments(view, 16.0)) {
      ++total;
      double best = 1.0;
      for (const auto& a : axes) best = std::min(best, std::abs(s.normal.vec().dot(a)));
      CHECK(std::asin(best) < 2.0 * kDeg);
    }
  }
  CHECK(total >= 12);
}

TEST_CASE("synthetic segments from a rotated room recover its axes") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    const Rotation3 R = Rotation3::from_axis_angle(Vec3(n(rng), n(rng), n(rng)), 0.3 * std::abs(n(rng)));
    const std::array<Vec3, 3> axes = {R * Vec3::UnitX(), R * Vec3::UnitY(), R * Vec3::UnitZ()};
    const auto basis = estimate_vanishing_basis(manhattan_segments(axes, 15, rng));
    CHECK(axis_error(basis, axes) < 1.0 * kDeg);
    CHECK(basis.axes[kAxisY].y() > 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) CHECK(std::abs(basis.axes[i].dot(basis.axes[j])) < 1e-6);
    CHECK(basis.rotation.matrix().determinant() == doctest::Approx(1.0));
    for (int k = 0; k < 3; ++k) {
      const Vec3 mapped = basis.rotation * basis.axes[k].vec();
      CHECK(mapped[k] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("axis-aligned segments give the identity") {
  std::mt19937_64 rng(5);
  const auto basis = estimate_vanishing_basis(manhattan_segments({Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, 12, rng));
  CHECK(basis.rotation.angle() < 1e-3);
}

TEST_CASE("degenerate segment sets have no consensus") {
  std::vector<LineSegment> parallel;
  for (int i = 0; i < 6; ++i) {
    const Vec3 p(1.0 + i, -1.0, 3.0 - 0.5 * i);
    parallel.push_back(make_segment(p, p + Vec3(0, 2, 0)));
  }
  try {
    (void)estimate_vanishing_basis(parallel);
    FAIL("expected NoConsensus");
  } catch (const NoConsensus& e) {
    CHECK(e.code() == ErrorCode::no_consensus);
  }
  std::mt19937_64 rng(1);
  auto few = manhattan_segments({Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, 2, rng);
  few.resize(5);
  CHECK_THROWS_AS((void)estimate_vanishing_basis(few), NoConsensus);
}

TEST_CASE("the basis does not depend on segment order") {
  std::mt19937_64 rng(23);
  const Rotation3 R = Rotation3::pitch(0.1) * Rotation3::yaw(0.4);
  const std::array<Vec3, 3> axes = {R * Vec3::UnitX(), R * Vec3::UnitY(), R * Vec3::UnitZ()};
  auto segs = manhattan_segments(axes, 10, rng);
  const auto a = estimate_vanishing_basis(segs);
  std::shuffle(segs.begin(), segs.end(), rng);
  const auto b = estimate_vanishing_basis(segs);
  CHECK((a.rotation.matrix() - b.rotation.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("an aligned panorama is a fixed point") {
  const auto [spec, L] = synth::gen_room(8, 4);
  const auto pano = synth::render_wireframe_panorama(L, 1024);
  const auto res = align_panorama(pano);
  CHECK(res.rotation_angle < 0.5 * kDeg);
  REQUIRE(res.line_map.channels() == 3);
  int ones = 0;
  for (float f : res.line_map.data()) {
    CHECK((f == 0.0f || f == 1.0f));
    ones += f == 1.0f;
  }
  CHECK(ones > 0);
}

TEST_CASE("a 10 degree pitch is undone") {
  const auto [spec, L] = synth::gen_room(9, 4);
  const auto pano = synth::render_wireframe_panorama(L, 1024);
  const auto tilted = synth::render_wireframe_panorama(L, 1024, Rotation3::pitch(10 * kDeg));
  const auto res = align_panorama(tilted);
  CHECK(res.rotation_angle == doctest::Approx(10 * kDeg).epsilon(0.05));
  const double db = geom::psnr(res.aligned, pano);
  MESSAGE("round-trip PSNR " << db << " dB");
  CHECK(db > 35.0);
}

TEST_CASE("aligning twice converges toward the identity") {
  const auto [spec, L] = synth::gen_room(10, 6);
  const auto pano = synth::render_wireframe_panorama(L, 1024, Rotation3::roll(7 * kDeg) * Rotation3::pitch(-4 * kDeg));
  const auto first = align_panorama(pano);
  const auto second = align_panorama(first.aligned);
  CHECK(second.rotation_angle < first.rotation_angle);
  CHECK(second.rotation_angle < 0.5 * kDeg);
}
