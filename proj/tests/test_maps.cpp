#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "layoutkit/maps.hpp"
#include "layoutkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace layoutkit;
using namespace layoutkit::maps;
using geom::EquirectImage;
using geom::kPi;
using geom::Vec2;
using solver::ManhattanLayout;

namespace {

constexpr int kW = 1024;

ManhattanLayout square_room() {
  ManhattanLayout L;
  L.vertices = {{-2, -2}, {-2, 2}, {2, 2}, {2, -2}};
  L = solver::oriented(L);
  L.camera_height = 1.5;
  L.ceiling = 3.0;
  return L;
}

void add_gaussian(EquirectImage& m, double u, double v, double sigma, double peak = 1.0) {
  const int w = m.width();
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const double du = geom::wrapped_column_delta(u, x, w);
      const double dv = y - v;
      const double g = peak * std::exp(-(du * du + dv * dv) / (2 * sigma * sigma));
      m.at(x, y) = static_cast<float>(std::max<double>(m.at(x, y), g));
    }
  }
}

void fill_block(EquirectImage& m, int u0, int v0, int size_u, int size_v, float value) {
  for (int y = v0; y < v0 + size_v; ++y)
    for (int x = u0; x < u0 + size_u; ++x) m.at(x, y) = value;
}

// Pixels no smaller than any 8-neighbour and above half the peak.
int local_maxima(const EquirectImage& m, std::vector<int>* columns = nullptr) {
  int count = 0;
  const int w = m.width();
  for (int y = 1; y + 1 < m.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const float c = m.at(x, y);
      if (c < 0.5f) continue;
      bool top = true;
      for (int dy = -1; dy <= 1 && top; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float n = m.at((x + dx + w) % w, y + dy);
          // strict on the earlier half so a flat pair counts once
          if (n > c || (n == c && (dy < 0 || (dy == 0 && dx < 0)))) {
            top = false;
            break;
          }
        }
      if (top) {
        ++count;
        if (columns) columns->push_back(x);
      }
    }
  }
  return count;
}

}  // namespace

TEST_CASE("square room corner map peaks at the eighth columns") {
  const ProbMaps m = render_ground_truth(square_room(), kW);
  std::vector<int> cols;
  CHECK(local_maxima(m.corner(), &cols) == 8);
  for (int c : cols) {
    double best = 1e9;
    for (double k : {1.0, 3.0, 5.0, 7.0}) best = std::min(best, std::abs(c - (k * kW / 8 - 0.5)));
    CHECK(best <= 1.0);
  }
}

TEST_CASE("wall-wall channel occupies four vertical bands") {
  const ProbMaps m = render_ground_truth(square_room(), kW);
  std::vector<bool> used(kW, false);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < kW; ++x)
      if (m.boundary().at(x, y, kWallWall) > 0.0f) used[x] = true;
  int runs = 0;
  int width_total = 0;
  for (int x = 0; x < kW; ++x) {
    width_total += used[x];
    if (used[x] && !used[(x + kW - 1) % kW]) ++runs;
  }
  CHECK(runs == 4);
  CHECK(width_total <= 4 * 30);
}

TEST_CASE("ground truth is a probability map with unit blob peaks") {
  const auto [spec, L] = synth::gen_room(4, 6);
  const ProbMaps m = render_ground_truth(L, 512);
  const geom::Raster r = m.to_raster();
  const auto [lo, hi] = std::minmax_element(r.data().begin(), r.data().end());
  CHECK(*lo >= 0.0f);
  CHECK(*hi == doctest::Approx(1.0));
  ManhattanLayout outside = L;
  outside.camera = Vec2(100, 100);
  CHECK_THROWS_AS((void)render_ground_truth(outside, 512), DomainError);
}

TEST_CASE("extract_corners recovers projected corners within 1 px on 100 rooms") {
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const auto [spec, L] = synth::gen_room(1000 + s, s % 2 ? 6 : 4);
    const CornerSet truth = solver::project_corners(L, kW);
    const CornerSet got = extract_corners(render_ground_truth(L, kW).corner());
    REQUIRE(got.size() == truth.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      const auto& a = got.corners[i];
      const auto& b = truth.corners[i];
      worst = std::max({worst, std::abs(geom::wrapped_column_delta(a.u, b.u, kW)), std::abs(a.v_top - b.v_top),
                        std::abs(a.v_bot - b.v_bot)});
    }
  }
  MESSAGE("worst corner offset " << worst << " px");
  CHECK(worst <= 1.0);
}

TEST_CASE("extraction of constructed Gaussians") {
  EquirectImage m(kW, 1);
  for (double u : {100.0, 300.0, 600.0, 900.0}) {
    add_gaussian(m, u, 80, 3.0);
    add_gaussian(m, u, 176, 3.0);
  }
  const CornerSet cs = extract_corners(m);
  REQUIRE(cs.size() == 4);
  const double cols[] = {100, 300, 600, 900};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(cs.corners[i].u - cols[i]) <= 1.0);
    CHECK(std::abs(cs.corners[i].v_top - 80) <= 1.0);
    CHECK(std::abs(cs.corners[i].v_bot - 176) <= 1.0);
    CHECK(cs.corners[i].v_top < cs.corners[i].v_bot);
  }
}

TEST_CASE("peaks closer than 20 px merge") {
  EquirectImage m(kW, 1);
  add_gaussian(m, 100, 80, 3.0);
  add_gaussian(m, 112, 80, 3.0);
  add_gaussian(m, 100, 176, 3.0);
  add_gaussian(m, 112, 176, 3.0);
  const CornerSet cs = detect_corners(m);
  CHECK(cs.size() == 1);
  CHECK_THROWS_AS((void)extract_corners(m), InsufficientCorners);
}

TEST_CASE("all-zero map has no corners") {
  EquirectImage m(kW, 1);
  try {
    (void)extract_corners(m);
    FAIL("expected InsufficientCorners");
  } catch (const InsufficientCorners& e) {
    CHECK(e.found().size() == 0);
    CHECK(e.code() == ErrorCode::insufficient_corners);
  }
}

TEST_CASE("extraction is equivariant under roll") {
  const auto [spec, L] = synth::gen_room(21, 4);
  const ProbMaps m = render_ground_truth(L, kW);
  const CornerSet a = extract_corners(m.corner());
  const int k = 137;
  const CornerSet b = extract_corners(augment(m.corner(), Roll{k}));
  REQUIRE(a.size() == b.size());
  for (const auto& c : a.corners) {
    const double u = std::fmod(c.u + k, kW);
    bool found = false;
    for (const auto& d : b.corners) {
      if (std::abs(geom::wrapped_column_delta(u, d.u, kW)) < 1e-6 && std::abs(c.v_top - d.v_top) < 1e-6) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("augmentation identities") {
  const auto [spec, L] = synth::gen_room(3, 4);
  const ProbMaps m = render_ground_truth(L, 256);
  CHECK(augment(m.corner(), Roll{256}) == m.corner());
  CHECK(augment(augment(m.corner(), Flip{}), Flip{}) == m.corner());
  CHECK(augment(m.boundary(), Gamma{1.0}) == m.boundary());
  CHECK(augment(augment(m, Roll{40}), Roll{-40}).to_raster() == m.to_raster());
  CHECK_THROWS_AS((void)augment(m, Gamma{1.5}), DomainError);
  CHECK_THROWS_AS((void)augment(m.corner(), Gamma{3.0}), DomainError);

  EquirectImage img(64, 1, 0.25f);
  CHECK(augment(img, Gamma{2.0}).at(3, 3) == doctest::Approx(0.0625));
  const EquirectImage rolled = augment(m.corner(), Roll{1});
  CHECK(rolled.at(1, 50) == m.corner().at(0, 50));
  const EquirectImage flipped = augment(m.corner(), Flip{});
  CHECK(flipped.at(0, 50) == m.corner().at(255, 50));
}

TEST_CASE("loss closed forms") {
  // binary target: corner blobs of a square room, thresholded
  geom::Raster bin = rasterize_layout_masks(square_room(), 256, 2.0);
  const ProbMaps gt = ProbMaps::from_raster(bin);
  solver::CuboidParams d{4, 4, 3, 0, 0, 0};
  CHECK(eval_loss(gt, gt, d, d) < 1e-5);

  const ProbMaps half = ProbMaps::uniform(256, 0.5f);
  LossWeights w;
  CHECK(binary_cross_entropy(half.boundary(), gt.boundary(), w.background_reweight) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(eval_loss(half, gt, d, d, w) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-9));

  solver::CuboidParams taller = d;
  taller.s_h += 1.0;
  CHECK(eval_loss(gt, gt, taller, d) - eval_loss(gt, gt, d, d) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("loss is non-negative and order-sensitive") {
  const auto [spec, L] = synth::gen_room(8, 4);
  const ProbMaps a = render_ground_truth(L, 256);
  const ProbMaps b = ProbMaps::uniform(256, 0.3f);
  solver::CuboidParams d;
  CHECK(eval_loss(a, b, d, d) >= 0.0);
  CHECK(eval_loss(b, a, d, d) >= 0.0);
  CHECK(eval_loss(a, b, d, d) != doctest::Approx(eval_loss(b, a, d, d)));
  CHECK_THROWS_AS((void)eval_loss(a, ProbMaps::uniform(128, 0.5f), d, d), DomainError);
}

TEST_CASE("wall count decision") {
  auto six_columns = [](float sixth) {
    EquirectImage m(kW, 1);
    const int cols[] = {60, 230, 400, 570, 740};
    for (int c : cols) {
      fill_block(m, c, 150, 5, 5, 1.0f);
      fill_block(m, c, 350, 5, 5, 1.0f);
    }
    // the sixth column: flat plateaus taller than the confidence window, so the
    // window mean equals the plateau value
    fill_block(m, 900, 100, 11, 60, sixth);
    fill_block(m, 900, 350, 11, 60, sixth);
    return m;
  };
  CHECK(decide_wall_count(six_columns(0.30f)) == 6);
  CHECK(decide_wall_count(six_columns(0.01f)) == 4);
  CHECK(decide_wall_count(six_columns(0.05f)) == 6);
  CHECK(decide_wall_count(six_columns(0.049f)) == 4);
  CHECK(decide_wall_count(EquirectImage(kW, 1)) == 4);
}

TEST_CASE("clean L-room maps are classified as six-walled") {
  for (int s = 0; s < 20; ++s) {
    const auto [spec, L] = synth::gen_room(500 + s, 6);
    CHECK(decide_wall_count(render_ground_truth(L, kW).corner()) == 6);
  }
  for (int s = 0; s < 20; ++s) {
    const auto [spec, L] = synth::gen_room(500 + s, 4);
    CHECK(decide_wall_count(render_ground_truth(L, kW).corner()) == 4);
  }
}

TEST_CASE("blob labelling wraps horizontally") {
  geom::Raster r(16, 8, 1);
  r.at(0, 3) = 1.0f;
  r.at(15, 3) = 1.0f;
  r.at(7, 6) = 0.5f;
  const auto labels = label_blobs(r, 0);
  CHECK(labels.count == 2);
  CHECK(labels.label[3 * 16 + 0] == labels.label[3 * 16 + 15]);
  CHECK(labels.label[0] == -1);
  normalize_blobs(r);
  CHECK(r.at(7, 6) == doctest::Approx(1.0));
}
