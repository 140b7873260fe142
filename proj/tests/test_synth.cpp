#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layoutkit/polygon.hpp"
#include "layoutkit/synth.hpp"

#include <algorithm>
#include <cmath>

using namespace layoutkit;
using namespace layoutkit::synth;
using geom::Vec2;

TEST_CASE("rooms are deterministic in the seed") {
  for (int walls : {4, 6}) {
    const auto [sa, a] = gen_room(77, walls);
    const auto [sb, b] = gen_room(77, walls);
    CHECK(a == b);
    CHECK(sa.camera == sb.camera);
    const auto [sc, c] = gen_room(78, walls);
    CHECK_FALSE(a == c);
  }
  CHECK_THROWS_AS((void)gen_room(1, 5), DomainError);
}

TEST_CASE("1000 seeds satisfy the room invariants") {
  int reflex_ok = 0;
  for (int s = 0; s < 1000; ++s) {
    const int walls = s % 2 ? 6 : 4;
    const auto [spec, L] = gen_room(s, walls);
    REQUIRE(L.wall_count() == walls);
    CHECK(solver::is_valid(L));
    CHECK(geom::distance_to_boundary(L.camera, L.vertices) >= kMinWallDistance - 1e-12);
    for (int i = 0; i < walls; ++i) {
      const Vec2 e = L.vertices[(i + 1) % walls] - L.vertices[i];
      const Vec2 f = L.vertices[(i + 2) % walls] - L.vertices[(i + 1) % walls];
      CHECK(std::abs(e.dot(f)) < 1e-9 * e.norm() * f.norm());
    }
    CHECK(spec.width >= 2.0);
    CHECK(spec.width <= 8.0);
    CHECK(spec.length >= 2.0);
    CHECK(spec.length <= 8.0);
    CHECK(spec.height >= 2.0);
    CHECK(spec.height <= 8.0);
    CHECK(spec.camera_height_fraction >= 0.3);
    CHECK(spec.camera_height_fraction <= 0.7);
    CHECK(L.camera_height == doctest::Approx(spec.camera_height_fraction * (L.ceiling - L.floor)));
    if (walls == 6) {
      reflex_ok += solver::reflex_vertices(L).size() == 1;
      CHECK(spec.notch_width >= 0.25 * spec.width);
      CHECK(spec.notch_width <= 0.6 * spec.width);
      CHECK(spec.notch_length >= 0.25 * spec.length);
      CHECK(spec.notch_length <= 0.6 * spec.length);
    }
    const auto corners = solver::project_corners(L, 1024);
    for (std::size_t i = 0; i < corners.size(); ++i) {
      const double gap = geom::forward_column_gap(corners.corners[i].u, corners.corners[(i + 1) % corners.size()].u, 1024);
      CHECK(gap >= kMinCornerGapPixels);
    }
  }
  CHECK(reflex_ok == 500);
}

TEST_CASE("zero corruption is the identity") {
  const auto [spec, L] = gen_room(3, 6);
  const auto m = maps::render_ground_truth(L, 512);
  CHECK(corrupt_maps(m, 0, 0, 0, 9).to_raster() == m.to_raster());
  CHECK_THROWS_AS((void)corrupt_maps(m, 0, 0, 1.0, 9), DomainError);
  CHECK_THROWS_AS((void)corrupt_maps(m, -1, 0, 0, 9), DomainError);
}

TEST_CASE("corruption stays in [0, 1] and is deterministic") {
  const auto [spec, L] = gen_room(4, 4);
  const auto m = maps::render_ground_truth(L, 512);
  const auto a = corrupt_maps(m, 2.0, 0.2, 0.25, 5);
  const auto b = corrupt_maps(m, 2.0, 0.2, 0.25, 5);
  CHECK(a.to_raster() == b.to_raster());
  const auto r = a.to_raster();
  const auto [lo, hi] = std::minmax_element(r.data().begin(), r.data().end());
  CHECK(*lo >= 0.0f);
  CHECK(*hi <= 1.0f);
  CHECK_FALSE(corrupt_maps(m, 2.0, 0.2, 0.25, 6).to_raster() == r);
}

TEST_CASE("dropout of a quarter removes two of eight corner blobs") {
  const auto [spec, L] = gen_room(12, 4);
  const auto m = maps::render_ground_truth(L, 1024);
  REQUIRE(maps::label_blobs(m.corner(), 0).count == 8);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = corrupt_maps(m, 0, 0, 0.25, seed);
    CHECK(maps::label_blobs(d.corner(), 0).count == 6);
    CHECK(d.boundary() == m.boundary());
  }
}

TEST_CASE("noisy maps still yield every corner column within 2 px") {
  double worst = 0.0;
  int complete = 0;
  for (int s = 0; s < 100; ++s) {
    const auto [spec, L] = gen_room(300 + s, 4);
    const auto truth = solver::project_corners(L, 1024);
    const auto m = corrupt_maps(maps::render_ground_truth(L, 1024), 0.0, 0.05, 0.0, s);
    const auto got = maps::strongest(maps::extract_corners(m.corner()), truth.size());
    if (got.size() != truth.size()) continue;
    ++complete;
    for (std::size_t i = 0; i < got.size(); ++i) {
      worst = std::max(worst, std::abs(geom::wrapped_column_delta(got.corners[i].u, truth.corners[i].u, 1024)));
    }
  }
  MESSAGE("worst column offset " << worst << " px");
  CHECK(complete == 100);
  CHECK(worst <= 2.0);
}

TEST_CASE("wireframe panorama draws the room edges") {
  const auto [spec, L] = gen_room(5, 4);
  WireframeOptions opt;
  opt.extra_lines = false;
  const auto img = render_wireframe_panorama(L, 512, geom::Rotation3::identity(), opt);
  REQUIRE(img.channels() == 1);
  const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
  CHECK(*lo >= opt.background - 1e-6);
  CHECK(*hi <= opt.foreground + 1e-6);
  for (int i = 0; i < 4; ++i) {
    const auto p = solver::project(L, L.ceiling_corner(i), 512);
    CHECK(img.sample(p, 0) > 0.8f);
  }
  // corners follow the scene rotation
  const auto rotated = render_wireframe_panorama(L, 512, geom::Rotation3::yaw(0.5), opt);
  const auto q = geom::dir_to_pix(geom::Rotation3::yaw(0.5) * (L.ceiling_corner(0) - L.camera_position()), 512);
  CHECK(rotated.sample(q, 0) > 0.8f);
}
