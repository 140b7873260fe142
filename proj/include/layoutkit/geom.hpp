#pragma once

// Coordinate conventions shared by every module.
//
// World axes: y is up, the floor lies in the x-z plane.
// Equirectangular pixel (u, v), integer u/v at pixel centers:
//   azimuth   theta = (u + 0.5) / W * 2pi - pi      (increases with u)
//   elevation phi   = pi/2 - (v + 0.5) / H * pi     (v = 0 is up)
//   direction       = (cos phi sin theta, sin phi, cos phi cos theta)

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <span>
#include <vector>

namespace layoutkit::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Unit vector. Construction normalizes; a zero vector is a domain error.
class Direction3 {
 public:
  Direction3() : v_(0.0, 0.0, 1.0) {}
  explicit Direction3(const Vec3& v);
  Direction3(double x, double y, double z) : Direction3(Vec3(x, y, z)) {}

  [[nodiscard]] const Vec3& vec() const noexcept { return v_; }
  [[nodiscard]] double x() const noexcept { return v_.x(); }
  [[nodiscard]] double y() const noexcept { return v_.y(); }
  [[nodiscard]] double z() const noexcept { return v_.z(); }
  [[nodiscard]] double dot(const Direction3& o) const noexcept { return v_.dot(o.v_); }
  [[nodiscard]] Direction3 operator-() const { return Direction3(-v_); }

 private:
  Vec3 v_;
};

/// Proper rotation (orthonormal, det +1 within 1e-9).
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}
  explicit Rotation3(const Mat3& m);

  static Rotation3 identity() { return {}; }
  /// Nearest rotation to an arbitrary 3x3 matrix (SVD projection).
  static Rotation3 nearest(const Mat3& m);
  static Rotation3 from_axis_angle(const Vec3& axis, double angle);
  /// Rotation about world-y; positive yaw increases azimuth.
  static Rotation3 yaw(double angle);
  /// Rotation about world-x.
  static Rotation3 pitch(double angle);
  /// Rotation about world-z.
  static Rotation3 roll(double angle);
  /// Smallest rotation taking `from` onto `to`.
  static Rotation3 between(const Direction3& from, const Direction3& to);

  [[nodiscard]] const Mat3& matrix() const noexcept { return m_; }
  [[nodiscard]] Rotation3 inverse() const { return Rotation3(Mat3(m_.transpose())); }
  [[nodiscard]] Rotation3 operator*(const Rotation3& o) const;
  [[nodiscard]] Vec3 operator*(const Vec3& v) const { return m_ * v; }
  [[nodiscard]] Direction3 operator*(const Direction3& d) const { return Direction3(m_ * d.vec()); }
  /// Rotation angle in radians, in [0, pi].
  [[nodiscard]] double angle() const;

 private:
  Mat3 m_;
};

/// Continuous pixel position on an equirectangular grid.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

[[nodiscard]] double azimuth_of_column(double u, int width);
[[nodiscard]] double elevation_of_row(double v, int width);
[[nodiscard]] double column_of_azimuth(double theta, int width);
[[nodiscard]] double row_of_elevation(double phi, int width);

/// Direction of a pixel. Throws DomainError outside 0 <= u < W, 0 <= v < W/2.
[[nodiscard]] Direction3 pix_to_dir(double u, double v, int width);
/// Inverse of pix_to_dir; u wrapped into [0, W).
[[nodiscard]] PixelCoord dir_to_pix(const Vec3& dir, int width);
[[nodiscard]] inline PixelCoord dir_to_pix(const Direction3& dir, int width) {
  return dir_to_pix(dir.vec(), width);
}

/// Signed column difference b - a wrapped into [-W/2, W/2).
[[nodiscard]] double wrapped_column_delta(double a, double b, int width);
/// Forward gap from a to b in [0, W).
[[nodiscard]] double forward_column_gap(double a, double b, int width);

enum class Interp { bilinear, nearest };

/// Dense multi-channel float raster, row-major, channels interleaved.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, float fill = 0.0f);
  Raster(int width, int height, int channels, std::vector<float> data);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] float& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  [[nodiscard]] float at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  [[nodiscard]] std::span<float> data() noexcept { return data_; }
  [[nodiscard]] std::span<const float> data() const noexcept { return data_; }

  /// One channel copied out as a single-channel raster.
  [[nodiscard]] Raster channel(int c) const;
  void set_channel(int c, const Raster& src);

  /// Sample with horizontal wraparound and vertical clamping.
  [[nodiscard]] float sample_wrap(double x, double y, int c, Interp interp = Interp::bilinear) const;
  /// Sample with clamping on both axes.
  [[nodiscard]] float sample_clamp(double x, double y, int c, Interp interp = Interp::bilinear) const;

  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Panorama raster: width even and >= 64, height = width / 2, values finite.
class EquirectImage : public Raster {
 public:
  EquirectImage() = default;
  EquirectImage(int width, int channels, float fill = 0.0f);
  /// Validates the panoramic invariants; throws DomainError.
  explicit EquirectImage(Raster raster);

  [[nodiscard]] float sample(const PixelCoord& p, int c, Interp interp = Interp::bilinear) const {
    return sample_wrap(p.u, p.v, c, interp);
  }
};

/// Resample so output pixel (u, v) reads input at dir_to_pix(R^-1 pix_to_dir(u, v)).
[[nodiscard]] EquirectImage rotate_equirect(const EquirectImage& img, const Rotation3& rotation,
                                            Interp interp = Interp::bilinear);

/// Pinhole camera looking along `forward`, square image of `size` pixels.
struct PerspectiveCamera {
  Vec3 forward{0.0, 0.0, 1.0};
  Vec3 right{1.0, 0.0, 0.0};
  Vec3 up{0.0, 1.0, 0.0};
  double focal = 1.0;  // pixels
  int size = 0;

  static PerspectiveCamera looking_at(const Direction3& center, double fov, int size);

  /// World ray through image point (x, y); pixel centers at integer + 0.5.
  [[nodiscard]] Direction3 ray(double x, double y) const;
  /// Image point of a direction in front of the camera.
  [[nodiscard]] Vec2 project(const Vec3& dir) const;
};

struct PerspectiveView {
  Raster image;
  PerspectiveCamera camera;
};

/// Pinhole view of the panorama. Up is world-y projected onto the view plane;
/// world-z when the center is at a pole. Throws DomainError unless 0 < fov < pi.
[[nodiscard]] PerspectiveView extract_perspective_view(const EquirectImage& img, const Direction3& center,
                                                       double fov, int size,
                                                       Interp interp = Interp::bilinear);

/// Peak signal-to-noise ratio in dB for signals in [0, peak].
[[nodiscard]] double psnr(const Raster& a, const Raster& b, double peak = 1.0);

}  // namespace layoutkit::geom
