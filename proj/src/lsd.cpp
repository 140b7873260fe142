#include "layoutkit/align.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace layoutkit::align {

using geom::kPi;

namespace {

struct Gradient {
  std::vector<float> mag;
  std::vector<float> angle;  // level-line orientation in [0, pi)
  int w = 0;
  int h = 0;
};

// 2x2 differences; sample (x, y) sits at continuous image position (x + 1, y + 1).
Gradient gradient(const geom::Raster& img) {
  Gradient g;
  g.w = img.width() - 1;
  g.h = img.height() - 1;
  const std::size_t n = static_cast<std::size_t>(std::max(0, g.w)) * std::max(0, g.h);
  g.mag.assign(n, 0.0f);
  g.angle.assign(n, 0.0f);
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      const double a = img.at(x, y);
      const double b = img.at(x + 1, y);
      const double c = img.at(x, y + 1);
      const double d = img.at(x + 1, y + 1);
      const double gx = 0.5 * (b + d - a - c);
      const double gy = 0.5 * (c + d - a - b);
      const std::size_t i = static_cast<std::size_t>(y) * g.w + x;
      g.mag[i] = static_cast<float>(std::hypot(gx, gy));
      double t = std::atan2(gx, -gy);
      if (t < 0.0) t += kPi;
      if (t >= kPi) t -= kPi;
      g.angle[i] = static_cast<float>(t);
    }
  }
  return g;
}

geom::Raster presmooth(const geom::Raster& img, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  for (int t = -r; t <= r; ++t) k[t + r] = std::exp(-0.5 * t * t / (sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  const int w = img.width();
  const int h = img.height();
  geom::Raster tmp(w, h, 1);
  geom::Raster out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double a = 0.0;
      for (int t = -r; t <= r; ++t) a += k[t + r] * img.at(std::clamp(x + t, 0, w - 1), y);
      tmp.at(x, y) = static_cast<float>(a);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double a = 0.0;
      for (int t = -r; t <= r; ++t) a += k[t + r] * tmp.at(x, std::clamp(y + t, 0, h - 1));
      out.at(x, y) = static_cast<float>(a);
    }
  }
  return out;
}

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), kPi);
  return std::min(d, kPi - d);
}

std::vector<int> grow(const Gradient& g, int seed, double tol, double rho, int radius, std::vector<char>& used) {
  std::vector<int> region{seed};
  used[seed] = 1;
  double sc = std::cos(2.0 * g.angle[seed]);
  double ss = std::sin(2.0 * g.angle[seed]);
  double theta = g.angle[seed];
  for (std::size_t k = 0; k < region.size(); ++k) {
    const int x0 = region[k] % g.w;
    const int y0 = region[k] / g.w;
    for (int dy = -radius; dy <= radius; ++dy) {
      const int y = y0 + dy;
      if (y < 0 || y >= g.h) continue;
      for (int dx = -radius; dx <= radius; ++dx) {
        const int x = x0 + dx;
        if (x < 0 || x >= g.w) continue;
        const int i = y * g.w + x;
        if (used[i] || g.mag[i] <= rho || angle_diff(g.angle[i], theta) >= tol) continue;
        used[i] = 1;
        region.push_back(i);
        sc += std::cos(2.0 * g.angle[i]);
        ss += std::sin(2.0 * g.angle[i]);
        theta = 0.5 * std::atan2(ss, sc);
        if (theta < 0.0) theta += kPi;
      }
    }
  }
  return region;
}

struct Rect {
  Vec2 p0;
  Vec2 p1;
  double width = 0.0;
  double density = 0.0;
  double strength = 0.0;
};

Rect fit_rect(const Gradient& g, const std::vector<int>& region) {
  double wsum = 0.0;
  Vec2 c = Vec2::Zero();
  for (int i : region) {
    const double w = g.mag[i];
    c += w * Vec2(i % g.w + 1.0, i / g.w + 1.0);
    wsum += w;
  }
  c /= wsum;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int i : region) {
    const Vec2 d = Vec2(i % g.w + 1.0, i / g.w + 1.0) - c;
    cov += g.mag[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Vec2 dir = es.eigenvectors().col(1);
  const Vec2 nrm(-dir.y(), dir.x());
  double lmin = 1e300, lmax = -1e300, wmin = 1e300, wmax = -1e300;
  for (int i : region) {
    const Vec2 d = Vec2(i % g.w + 1.0, i / g.w + 1.0) - c;
    const double l = d.dot(dir);
    const double t = d.dot(nrm);
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
    wmin = std::min(wmin, t);
    wmax = std::max(wmax, t);
  }
  Rect r;
  r.p0 = c + lmin * dir;
  r.p1 = c + lmax * dir;
  r.width = wmax - wmin + 1.0;
  r.density = static_cast<double>(region.size()) / ((lmax - lmin + 1.0) * r.width);
  r.strength = wsum;
  return r;
}

}  // namespace

std::vector<ImageSegment> detect_image_segments(const geom::Raster& gray, double min_length, const LsdOptions& opt) {
  if (gray.channels() != 1) throw DomainError("segment detection needs a single-channel image");
  std::vector<ImageSegment> out;
  if (gray.width() < 2 || gray.height() < 2) return out;
  const Gradient g = gradient(opt.presmooth_sigma > 0.0 ? presmooth(gray, opt.presmooth_sigma) : gray);
  const int n = g.w * g.h;
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    if (g.mag[i] > opt.gradient_threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.mag[a] > g.mag[b]; });
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int seed : order) {
    if (used[seed]) continue;
    auto region = grow(g, seed, opt.angle_tolerance, opt.gradient_threshold, opt.growth_radius, used);
    if (region.size() < 2) continue;
    Rect r = fit_rect(g, region);
    if (r.density < opt.min_density) {
      // Retry the same seed with half the tolerance; the released pixels stay available to later seeds.
      for (int i : region) used[i] = 0;
      region = grow(g, seed, 0.5 * opt.angle_tolerance, opt.gradient_threshold, opt.growth_radius, used);
      if (region.size() < 2) continue;
      r = fit_rect(g, region);
      if (r.density < opt.min_density) continue;
    }
    if ((r.p1 - r.p0).norm() < min_length || (r.p1 - r.p0).norm() < opt.min_aspect * r.width) continue;
    out.push_back({r.p0, r.p1, r.width, r.strength, static_cast<int>(region.size())});
  }
  return out;
}

LineSegment make_segment(const Vec3& a, const Vec3& b, double strength) {
  const Vec3 ua = a.normalized();
  const Vec3 ub = b.normalized();
  const Vec3 n = ua.cross(ub);
  if (!(n.norm() > 1e-12)) throw DomainError("segment endpoints are parallel");
  LineSegment s;
  s.a = Direction3(ua);
  s.b = Direction3(ub);
  s.normal = Direction3(n);
  s.length = std::atan2(n.norm(), ua.dot(ub));
  s.strength = strength;
  return s;
}

std::vector<LineSegment> detect_segments(const geom::PerspectiveView& view, double min_length, const LsdOptions& opt) {
  if (min_length < 8.0) throw DomainError("min_length must be at least 8 pixels");
  geom::Raster gray = view.image.channel(0);
  for (int c = 1; c < view.image.channels(); ++c) {
    const geom::Raster ch = view.image.channel(c);
    for (std::size_t i = 0; i < gray.size(); ++i) gray.data()[i] += ch.data()[i];
  }
  for (float& v : gray.data()) v /= static_cast<float>(view.image.channels());
  std::vector<LineSegment> out;
  for (const auto& s : detect_image_segments(gray, min_length, opt)) {
    const Vec3 a = view.camera.ray(s.p0.x(), s.p0.y()).vec();
    const Vec3 b = view.camera.ray(s.p1.x(), s.p1.y()).vec();
    if (a.cross(b).norm() < 1e-12) continue;
    out.push_back(make_segment(a, b, s.strength));
  }
  return out;
}

}  // namespace layoutkit::align
