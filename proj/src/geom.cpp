#include "layoutkit/geom.hpp"

#include "layoutkit/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace layoutkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::io: return "io_error";
    case ErrorCode::format: return "format_error";
    case ErrorCode::no_consensus: return "no_consensus";
    case ErrorCode::insufficient_corners: return "insufficient_corners";
    case ErrorCode::horizon_violation: return "horizon_violation";
    case ErrorCode::invalid_layout: return "invalid_layout";
  }
  return "unknown";
}

}  // namespace layoutkit

namespace layoutkit::geom {

namespace {

constexpr double kRotationTol = 1e-9;

// Sampling positions this close to a pixel center snap onto it, so exact
// column shifts and identity rotations reproduce the input bit for bit.
constexpr double kSnap = 1e-6;

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < kSnap ? r : x;
}

int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

Direction3::Direction3(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("direction must be a finite nonzero vector");
  v_ = v / n;
}

Rotation3::Rotation3(const Mat3& m) : m_(m) {
  const double ortho = (m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!(ortho < kRotationTol) || !(std::abs(det - 1.0) < kRotationTol)) {
    throw DomainError("matrix is not a proper rotation");
  }
}

Rotation3 Rotation3::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation3(Mat3(svd.matrixU() * d * svd.matrixV().transpose()));
}

Rotation3 Rotation3::from_axis_angle(const Vec3& axis, double angle) {
  return Rotation3(Mat3(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix()));
}

Rotation3 Rotation3::yaw(double angle) { return from_axis_angle(Vec3::UnitY(), angle); }
Rotation3 Rotation3::pitch(double angle) { return from_axis_angle(Vec3::UnitX(), angle); }
Rotation3 Rotation3::roll(double angle) { return from_axis_angle(Vec3::UnitZ(), angle); }

Rotation3 Rotation3::between(const Direction3& from, const Direction3& to) {
  const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(from.vec(), to.vec());
  return nearest(q.toRotationMatrix());
}

Rotation3 Rotation3::operator*(const Rotation3& o) const { return nearest(m_ * o.m_); }

double Rotation3::angle() const {
  const double c = std::clamp((m_.trace() - 1.0) * 0.5, -1.0, 1.0);
  // acos loses precision near identity; use the skew part there.
  const Vec3 w(m_(2, 1) - m_(1, 2), m_(0, 2) - m_(2, 0), m_(1, 0) - m_(0, 1));
  return std::atan2(0.5 * w.norm(), c);
}

double azimuth_of_column(double u, int width) { return (u + 0.5) / width * kTwoPi - kPi; }

double elevation_of_row(double v, int width) { return kPi / 2.0 - (v + 0.5) / (width / 2) * kPi; }

double column_of_azimuth(double theta, int width) {
  double u = (theta + kPi) / kTwoPi * width - 0.5;
  u = std::fmod(u, static_cast<double>(width));
  if (u < 0.0) u += width;
  if (u >= width) u -= width;
  return u;
}

double row_of_elevation(double phi, int width) { return (kPi / 2.0 - phi) / kPi * (width / 2) - 0.5; }

Direction3 pix_to_dir(double u, double v, int width) {
  if (width <= 0 || !(u >= 0.0 && u < width) || !(v >= 0.0 && v < width / 2)) {
    throw DomainError("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside panorama of width " +
                      std::to_string(width));
  }
  const double theta = azimuth_of_column(u, width);
  const double phi = elevation_of_row(v, width);
  const double c = std::cos(phi);
  return Direction3(c * std::sin(theta), std::sin(phi), c * std::cos(theta));
}

PixelCoord dir_to_pix(const Vec3& dir, int width) {
  const double theta = std::atan2(dir.x(), dir.z());
  const double phi = std::atan2(dir.y(), std::hypot(dir.x(), dir.z()));
  return {column_of_azimuth(theta, width), row_of_elevation(phi, width)};
}

double wrapped_column_delta(double a, double b, int width) {
  double d = std::fmod(b - a, static_cast<double>(width));
  if (d < -width / 2.0) d += width;
  if (d >= width / 2.0) d -= width;
  return d;
}

double forward_column_gap(double a, double b, int width) {
  double d = std::fmod(b - a, static_cast<double>(width));
  if (d < 0.0) d += width;
  return d;
}

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) throw DomainError("raster dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) throw DomainError("raster dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw DomainError("raster data size does not match dimensions");
  }
}

Raster Raster::channel(int c) const {
  Raster out(width_, height_, 1);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) out.at(x, y) = at(x, y, c);
  return out;
}

void Raster::set_channel(int c, const Raster& src) {
  if (src.width() != width_ || src.height() != height_) throw DomainError("channel size mismatch");
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) at(x, y, c) = src.at(x, y);
}

float Raster::sample_wrap(double x, double y, int c, Interp interp) const {
  x = snap(x);
  y = snap(y);
  if (interp == Interp::nearest) {
    const int xi = wrap_index(static_cast<int>(std::lround(x)), width_);
    const int yi = std::clamp(static_cast<int>(std::lround(y)), 0, height_ - 1);
    return at(xi, yi, c);
  }
  const double xf = std::floor(x);
  const double yc = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const double yf = std::floor(yc);
  const double ax = x - xf;
  const double ay = yc - yf;
  const int x0 = wrap_index(static_cast<int>(xf), width_);
  const int x1 = wrap_index(x0 + 1, width_);
  const int y0 = static_cast<int>(yf);
  const int y1 = std::min(y0 + 1, height_ - 1);
  if (ax == 0.0 && ay == 0.0) return at(x0, y0, c);
  const double top = (1.0 - ax) * at(x0, y0, c) + ax * at(x1, y0, c);
  const double bot = (1.0 - ax) * at(x0, y1, c) + ax * at(x1, y1, c);
  return static_cast<float>((1.0 - ay) * top + ay * bot);
}

float Raster::sample_clamp(double x, double y, int c, Interp interp) const {
  x = snap(std::clamp(x, 0.0, static_cast<double>(width_ - 1)));
  y = snap(std::clamp(y, 0.0, static_cast<double>(height_ - 1)));
  if (interp == Interp::nearest) {
    return at(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y)), c);
  }
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  if (ax == 0.0 && ay == 0.0) return at(x0, y0, c);
  const double top = (1.0 - ax) * at(x0, y0, c) + ax * at(x1, y0, c);
  const double bot = (1.0 - ax) * at(x0, y1, c) + ax * at(x1, y1, c);
  return static_cast<float>((1.0 - ay) * top + ay * bot);
}

bool Raster::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float f) { return std::isfinite(f); });
}

EquirectImage::EquirectImage(int width, int channels, float fill)
    : EquirectImage(Raster(width, width / 2 > 0 ? width / 2 : 1, channels, fill)) {}

EquirectImage::EquirectImage(Raster raster) : Raster(std::move(raster)) {
  if (width() < 64 || width() % 2 != 0) throw DomainError("panorama width must be even and >= 64");
  if (height() != width() / 2) throw DomainError("panorama height must equal width / 2");
  if (!all_finite()) throw DomainError("panorama contains non-finite values");
}

EquirectImage rotate_equirect(const EquirectImage& img, const Rotation3& rotation, Interp interp) {
  const int w = img.width();
  const int h = img.height();
  const int nc = img.channels();
  const Mat3 inv = rotation.matrix().transpose();
  const bool identity = (rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0;
  if (identity) return img;
  EquirectImage out(w, nc);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const PixelCoord src = dir_to_pix(Vec3(inv * pix_to_dir(u, v, w).vec()), w);
      for (int c = 0; c < nc; ++c) out.at(u, v, c) = img.sample(src, c, interp);
    }
  }
  return out;
}

PerspectiveCamera PerspectiveCamera::looking_at(const Direction3& center, double fov, int size) {
  if (!(fov > 0.0 && fov < kPi)) throw DomainError("field of view must lie in (0, pi)");
  if (size <= 0) throw DomainError("view size must be positive");
  PerspectiveCamera cam;
  cam.forward = center.vec();
  Vec3 hint = Vec3::UnitY();
  if (std::abs(cam.forward.dot(hint)) > 1.0 - 1e-9) hint = Vec3::UnitZ();
  cam.right = hint.cross(cam.forward).normalized();
  cam.up = cam.forward.cross(cam.right).normalized();
  cam.size = size;
  cam.focal = 0.5 * size / std::tan(0.5 * fov);
  return cam;
}

Direction3 PerspectiveCamera::ray(double x, double y) const {
  const double half = 0.5 * size;
  const double px = (x - half) / focal;
  const double py = -(y - half) / focal;
  return Direction3(forward + px * right + py * up);
}

Vec2 PerspectiveCamera::project(const Vec3& dir) const {
  const double z = dir.dot(forward);
  const double half = 0.5 * size;
  return {half + focal * dir.dot(right) / z, half - focal * dir.dot(up) / z};
}

PerspectiveView extract_perspective_view(const EquirectImage& img, const Direction3& center, double fov, int size,
                                         Interp interp) {
  PerspectiveView view{Raster(size, size, img.channels()), PerspectiveCamera::looking_at(center, fov, size)};
  const int w = img.width();
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const PixelCoord p = dir_to_pix(view.camera.ray(x + 0.5, y + 0.5), w);
      for (int c = 0; c < img.channels(); ++c) view.image.at(x, y, c) = img.sample(p, c, interp);
    }
  }
  return view;
}

double psnr(const Raster& a, const Raster& b, double peak) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw DomainError("psnr: raster size mismatch");
  }
  double sse = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace layoutkit::geom
