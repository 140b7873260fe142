#pragma once

#include "layoutkit/error.hpp"
#include "layoutkit/geom.hpp"

#include <array>
#include <vector>

namespace layoutkit::align {

using geom::Direction3;
using geom::Rotation3;
using geom::Vec2;
using geom::Vec3;

/// Straight segment in image coordinates (pixel centres at i + 0.5).
struct ImageSegment {
  Vec2 p0;
  Vec2 p1;
  double width = 0.0;     // rectangle width, pixels
  double strength = 0.0;  // summed gradient magnitude
  int support = 0;        // region pixels

  [[nodiscard]] double length() const { return (p1 - p0).norm(); }
};

struct LsdOptions {
  double angle_tolerance = 22.5 * geom::kPi / 180.0;
  double min_density = 0.7;
  double gradient_threshold = 2.0 / 255.0 / 0.3826834323650898;  // quantization / sin(tolerance)
  int growth_radius = 2;  // bridges the zero-gradient ridge of thin lines
  double min_aspect = 4.0;  // length / width
  double presmooth_sigma = 0.6;  // Gaussian before the gradient, edge-clamped; 0 disables
};

/// Region-growing line detection on a single-channel image. Orientation is
/// taken modulo pi, so both flanks of a thin line form one region.
[[nodiscard]] std::vector<ImageSegment> detect_image_segments(const geom::Raster& gray, double min_length,
                                                              const LsdOptions& options = {});

/// Segment on the unit sphere.
struct LineSegment {
  Direction3 a;
  Direction3 b;
  Direction3 normal;    // of the great circle through a and b
  double length = 0.0;  // arc, radians
  double strength = 0.0;
};

/// Great-circle segment between two directions; DomainError when they are parallel.
[[nodiscard]] LineSegment make_segment(const Vec3& a, const Vec3& b, double strength = 1.0);

/// Segments of a perspective view lifted to the sphere through its camera.
/// min_length >= 8 pixels (DomainError otherwise).
[[nodiscard]] std::vector<LineSegment> detect_segments(const geom::PerspectiveView& view, double min_length,
                                                       const LsdOptions& options = {});

enum Axis : int { kAxisX = 0, kAxisY = 1, kAxisZ = 2 };

struct VanishingBasis {
  std::array<Direction3, 3> axes;  // x-like, vertical, z-like; right-handed
  Rotation3 rotation;              // maps axes[i] to world unit vector i
  std::array<double, 3> vote_scores{};
};

class NoConsensus : public Error {
 public:
  NoConsensus(const std::string& what, std::vector<Direction3> partial)
      : Error(ErrorCode::no_consensus, what), partial_(std::move(partial)) {}
  [[nodiscard]] const std::vector<Direction3>& partial_axes() const noexcept { return partial_; }

 private:
  std::vector<Direction3> partial_;
};

struct VoteOptions {
  int bins_per_face = 90;  // cube-map bins, ~1 degree
  int peak_count = 50;
  double orthogonality_tolerance = 2.5 * geom::kPi / 180.0;
  double support_tolerance = 2.0 * geom::kPi / 180.0;
  int min_support = 2;  // segments per axis
  double crossing_angle = 5.0 * geom::kPi / 180.0;  // peaks need two great circles this far apart
};

/// Hough voting on the direction sphere for three mutually orthogonal
/// vanishing directions, refined by least squares and re-orthogonalized.
/// Fewer than 6 segments or no supported orthogonal triplet is NoConsensus.
[[nodiscard]] VanishingBasis estimate_vanishing_basis(const std::vector<LineSegment>& segments,
                                                      const VoteOptions& options = {});

struct AlignOptions {
  int views = 6;
  double fov = geom::kPi / 2.0;
  int view_size = 0;          // 0 picks width / 4
  double min_length = 0.0;    // 0 picks max(8, view_size / 16)
  LsdOptions lsd{};
  VoteOptions vote{};
};

struct AlignResult {
  geom::EquirectImage aligned;
  VanishingBasis basis;
  geom::EquirectImage line_map;  // 3 channels (x, vertical, z), values 0 or 1
  Rotation3 leveling;            // applied to the panorama
  double rotation_angle = 0.0;   // radians
  std::vector<LineSegment> segments;
};

/// Perspective views around the horizon, all segments pooled.
[[nodiscard]] std::vector<LineSegment> panorama_segments(const geom::EquirectImage& pano, const AlignOptions& options = {});

/// Levels the panorama: the smallest rotation taking the vertical vanishing
/// direction onto world-y. Propagates NoConsensus.
[[nodiscard]] AlignResult align_panorama(const geom::EquirectImage& pano, const AlignOptions& options = {});

/// One-pixel rasterization of each segment into the channel of its nearest axis.
[[nodiscard]] geom::EquirectImage rasterize_line_map(const std::vector<LineSegment>& segments,
                                                     const std::array<Direction3, 3>& axes, const Rotation3& rotation,
                                                     int width);

}  // namespace layoutkit::align
