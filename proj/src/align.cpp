#include "layoutkit/align.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <tuple>

namespace layoutkit::align {

using geom::kPi;
using geom::kTwoPi;

namespace {

// Cube-map bins over the whole sphere with equiangular spacing per face.
class SphereBins {
 public:
  explicit SphereBins(int per_face) : b_(per_face), votes_(static_cast<std::size_t>(6) * per_face * per_face, 0.0) {}

  [[nodiscard]] int size() const { return static_cast<int>(votes_.size()); }
  [[nodiscard]] int per_face() const { return b_; }

  [[nodiscard]] int index(const Vec3& d) const {
    int k = 0;
    if (std::abs(d.y()) > std::abs(d[k])) k = 1;
    if (std::abs(d.z()) > std::abs(d[k])) k = 2;
    const int face = 2 * k + (d[k] < 0.0 ? 1 : 0);
    const double m = std::abs(d[k]);
    const int i = cell(d[(k + 1) % 3] / m);
    const int j = cell(d[(k + 2) % 3] / m);
    return (face * b_ + i) * b_ + j;
  }

  [[nodiscard]] Vec3 center(int idx) const {
    const int j = idx % b_;
    const int i = (idx / b_) % b_;
    const int face = idx / (b_ * b_);
    const int k = face / 2;
    Vec3 d;
    d[k] = face % 2 ? -1.0 : 1.0;
    d[(k + 1) % 3] = std::tan((i + 0.5) / b_ * (kPi / 2) - kPi / 4);
    d[(k + 2) % 3] = std::tan((j + 0.5) / b_ * (kPi / 2) - kPi / 4);
    return d.normalized();
  }

  // In-face neighbours within one cell, including idx.
  template <typename F>
  void neighbourhood(int idx, F&& f) const {
    const int j = idx % b_;
    const int i = (idx / b_) % b_;
    const int base = idx - i * b_ - j;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int ni = i + di;
        const int nj = j + dj;
        if (ni < 0 || nj < 0 || ni >= b_ || nj >= b_) continue;
        f(base + ni * b_ + nj);
      }
    }
  }

  double& operator[](int idx) { return votes_[idx]; }
  double operator[](int idx) const { return votes_[idx]; }

 private:
  int cell(double t) const {
    const int c = static_cast<int>(std::floor((std::atan(t) + kPi / 4) / (kPi / 2) * b_));
    return std::clamp(c, 0, b_ - 1);
  }

  int b_;
  std::vector<double> votes_;
};

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 t = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(t).normalized();
}

double weight(const LineSegment& s) { return s.length * s.strength; }

double neighbourhood_max(const SphereBins& bins, const Vec3& d) {
  double best = 0.0;
  for (const Vec3& e : {d, Vec3(-d)}) {
    bins.neighbourhood(bins.index(e), [&](int k) { best = std::max(best, bins[k]); });
  }
  return best;
}

std::array<Vec3, 3> orthogonalize(std::array<Vec3, 3> a) {
  if (a[0].cross(a[1]).dot(a[2]) < 0.0) a[2] = -a[2];
  geom::Mat3 m;
  for (int k = 0; k < 3; ++k) m.col(k) = a[k];
  const geom::Mat3 r = geom::Rotation3::nearest(m).matrix();
  return {r.col(0), r.col(1), r.col(2)};
}

// Axis a segment belongs to, or -1 when it is near none or near two.
int assign(const LineSegment& seg, const std::array<Vec3, 3>& axes, double sin_tol) {
  int k = -1;
  for (int m = 0; m < 3; ++m) {
    if (std::abs(seg.normal.vec().dot(axes[m])) >= sin_tol) continue;
    if (k >= 0) return -1;
    k = m;
  }
  return k;
}

// Gauss-Newton on the rotation of an orthonormal triplet, minimizing the
// weighted squared normal components of each axis' segments.
std::array<Vec3, 3> refine(const std::vector<LineSegment>& segs, std::array<Vec3, 3> axes, double tol) {
  const double s = std::sin(tol);
  for (int iter = 0; iter < 8; ++iter) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    Vec3 g = Vec3::Zero();
    for (const auto& seg : segs) {
      const int k = assign(seg, axes, s);
      if (k < 0) continue;
      const Vec3& n = seg.normal.vec();
      const Vec3 j = axes[k].cross(n);
      const double w = weight(seg);
      h += w * j * j.transpose();
      g += w * n.dot(axes[k]) * j;
    }
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(h);
    if (ldlt.info() != Eigen::Success || !(h.trace() > 0.0)) break;
    const Vec3 omega = -ldlt.solve(g);
    const double angle = omega.norm();
    if (!std::isfinite(angle) || angle > 0.1) break;
    if (angle < 1e-14) break;
    const Eigen::AngleAxisd rot(angle, omega / angle);
    for (auto& a : axes) a = (rot * a).normalized();
  }
  return axes;
}

}  // namespace

VanishingBasis estimate_vanishing_basis(const std::vector<LineSegment>& input, const VoteOptions& opt) {
  if (input.size() < 6) throw NoConsensus("need at least 6 segments", {});
  // Canonical order so the result does not depend on the caller's ordering.
  std::vector<LineSegment> segs = input;
  auto key = [](const LineSegment& s) {
    return std::make_tuple(s.normal.x(), s.normal.y(), s.normal.z(), s.length, s.strength);
  };
  std::sort(segs.begin(), segs.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });

  SphereBins bins(opt.bins_per_face);
  std::vector<int> stamp(static_cast<std::size_t>(bins.size()), -1);
  // First voter per bin, and whether a great circle of a different orientation also passed.
  std::vector<int> first(static_cast<std::size_t>(bins.size()), -1);
  std::vector<char> crossing(static_cast<std::size_t>(bins.size()), 0);
  const double distinct = std::cos(opt.crossing_angle);
  const double step = 0.25 * kPi / 180.0;
  const int samples = static_cast<int>(std::ceil(kTwoPi / step));
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Vec3 n = segs[s].normal.vec();
    const Vec3 u = any_perpendicular(n);
    const Vec3 v = n.cross(u);
    const double w = weight(segs[s]);
    for (int k = 0; k < samples; ++k) {
      const double t = kTwoPi * k / samples;
      const int idx = bins.index(std::cos(t) * u + std::sin(t) * v);
      if (stamp[idx] == static_cast<int>(s)) continue;
      stamp[idx] = static_cast<int>(s);
      bins[idx] += w;
      if (first[idx] < 0) {
        first[idx] = static_cast<int>(s);
      } else if (!crossing[idx] && std::abs(segs[first[idx]].normal.dot(segs[s].normal)) < distinct) {
        crossing[idx] = 1;
      }
    }
  }

  // Local maxima where distinct great circles cross, strongest first, one per antipodal pair.
  std::vector<std::pair<double, int>> peaks;
  for (int idx = 0; idx < bins.size(); ++idx) {
    const double v = bins[idx];
    if (v <= 0.0 || !crossing[idx]) continue;
    bool is_max = true;
    bins.neighbourhood(idx, [&](int k) { is_max &= k == idx || bins[k] < v || (bins[k] == v && k > idx); });
    if (is_max) peaks.emplace_back(v, idx);
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Vec3> dirs;
  std::vector<double> votes;
  for (const auto& [v, idx] : peaks) {
    if (static_cast<int>(dirs.size()) >= opt.peak_count) break;
    const Vec3 d = bins.center(idx);
    bool dup = false;
    for (const auto& e : dirs) dup |= std::abs(e.dot(d)) > std::cos(1.5 * kPi / 180.0);
    if (dup) continue;
    dirs.push_back(d);
    votes.push_back(v);
  }

  struct Triplet {
    double score;
    std::array<Vec3, 3> axes;
  };
  std::vector<Triplet> triplets;
  const double ortho = std::sin(opt.orthogonality_tolerance);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      if (std::abs(dirs[i].dot(dirs[j])) >= ortho) continue;
      const Vec3 c = dirs[i].cross(dirs[j]).normalized();
      const double vc = neighbourhood_max(bins, c);
      triplets.push_back({votes[i] + votes[j] + vc, {dirs[i], dirs[j], c}});
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) { return a.score > b.score; });

  // Rank candidates by the weight of segments consistent with the refined triplet.
  const double inlier = std::sin(opt.support_tolerance);
  const Triplet* chosen = nullptr;
  std::array<Vec3, 3> axes;
  std::array<double, 3> consensus{};
  double best_score = -1.0;
  for (const auto& t : triplets) {
    const std::array<Vec3, 3> cand = refine(segs, orthogonalize(t.axes), opt.support_tolerance);
    std::array<double, 3> score{};
    std::array<int, 3> count{};
    for (const auto& seg : segs) {
      const int k = assign(seg, cand, inlier);
      if (k < 0) continue;
      score[k] += weight(seg);
      ++count[k];
    }
    if (*std::min_element(count.begin(), count.end()) < opt.min_support) continue;
    const double total = score[0] + score[1] + score[2];
    if (total > best_score) {
      best_score = total;
      chosen = &t;
      axes = cand;
      consensus = score;
    }
  }
  if (chosen != nullptr) {
    // Vertical = closest to world-y; x-like = closest to world-x of the rest.
    int vy = 0;
    for (int k = 1; k < 3; ++k) {
      if (std::abs(axes[k].y()) > std::abs(axes[vy].y())) vy = k;
    }
    int vx = -1;
    for (int k = 0; k < 3; ++k) {
      if (k == vy) continue;
      if (vx < 0 || std::abs(axes[k].x()) > std::abs(axes[vx].x())) vx = k;
    }
    const int vz = 3 - vx - vy;
    Vec3 ay = axes[vy].y() < 0.0 ? Vec3(-axes[vy]) : axes[vy];
    Vec3 ax = axes[vx].x() < 0.0 ? Vec3(-axes[vx]) : axes[vx];
    ax = (ax - ax.dot(ay) * ay).normalized();
    const Vec3 az = ax.cross(ay);
    VanishingBasis basis;
    basis.axes = {Direction3(ax), Direction3(ay), Direction3(az)};
    geom::Mat3 m;
    m.row(0) = ax;
    m.row(1) = ay;
    m.row(2) = az;
    basis.rotation = Rotation3::nearest(m);
    basis.vote_scores = {consensus[vx], consensus[vy], consensus[vz]};
    return basis;
  }
  std::vector<Direction3> partial;
  for (std::size_t k = 0; k < std::min<std::size_t>(3, dirs.size()); ++k) partial.emplace_back(dirs[k]);
  throw NoConsensus("no supported orthogonal vanishing triplet", std::move(partial));
}

namespace {

geom::Raster to_gray(const geom::Raster& img) {
  if (img.channels() == 1) return img;
  geom::Raster out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      float s = 0.0f;
      for (int c = 0; c < img.channels(); ++c) s += img.at(x, y, c);
      out.at(x, y) = s / static_cast<float>(img.channels());
    }
  }
  return out;
}

}  // namespace

std::vector<LineSegment> panorama_segments(const geom::EquirectImage& pano, const AlignOptions& opt) {
  const geom::EquirectImage gray(to_gray(pano));
  const int size = opt.view_size > 0 ? opt.view_size : pano.width() / 4;
  const double min_length = opt.min_length > 0.0 ? opt.min_length : std::max(8.0, size / 16.0);
  std::vector<LineSegment> segs;
  for (int k = 0; k < opt.views; ++k) {
    const double yaw = kTwoPi * k / opt.views;
    const auto view = geom::extract_perspective_view(gray, Direction3(std::sin(yaw), 0.0, std::cos(yaw)), opt.fov, size);
    const auto found = detect_segments(view, min_length, opt.lsd);
    segs.insert(segs.end(), found.begin(), found.end());
  }
  return segs;
}

geom::EquirectImage rasterize_line_map(const std::vector<LineSegment>& segs, const std::array<Direction3, 3>& axes,
                                       const Rotation3& rotation, int width) {
  geom::EquirectImage map(width, 3, 0.0f);
  const int height = width / 2;
  const double px = width / kTwoPi;
  for (const auto& s : segs) {
    int channel = 0;
    for (int k = 1; k < 3; ++k) {
      if (std::abs(s.normal.dot(axes[k])) < std::abs(s.normal.dot(axes[channel]))) channel = k;
    }
    const Vec3 a = rotation * s.a.vec();
    const Vec3 b = rotation * s.b.vec();
    const int n = static_cast<int>(std::ceil(s.length * px * 2.0)) + 1;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      // Spherical interpolation along the arc.
      const double ang = s.length;
      const Vec3 d = (std::sin((1.0 - t) * ang) * a + std::sin(t * ang) * b) / std::sin(ang);
      const auto p = geom::dir_to_pix(d, width);
      const int u = std::clamp(static_cast<int>(std::floor(p.u)), 0, width - 1);
      const int v = std::clamp(static_cast<int>(std::floor(p.v)), 0, height - 1);
      map.at(u, v, channel) = 1.0f;
    }
  }
  return map;
}

AlignResult align_panorama(const geom::EquirectImage& pano, const AlignOptions& opt) {
  AlignResult res;
  res.segments = panorama_segments(pano, opt);
  res.basis = estimate_vanishing_basis(res.segments, opt.vote);
  res.leveling = Rotation3::between(res.basis.axes[kAxisY], Direction3(0.0, 1.0, 0.0));
  res.rotation_angle = res.leveling.angle();
  res.aligned = geom::rotate_equirect(pano, res.leveling);
  res.line_map = rasterize_line_map(res.segments, res.basis.axes, res.leveling, pano.width());
  return res;
}

}  // namespace layoutkit::align
