#pragma once

#include "layoutkit/geom.hpp"
#include "layoutkit/layout.hpp"
#include "layoutkit/maps.hpp"

#include <cstdint>
#include <utility>

namespace layoutkit::synth {

using solver::ManhattanLayout;

struct RoomSpec {
  std::uint64_t seed = 0;
  int wall_count = 4;
  double width = 4.0;   // extent along the room's local x
  double length = 4.0;  // extent along the room's local z
  double height = 3.0;
  double notch_width = 0.0;  // L-shapes only
  double notch_length = 0.0;
  geom::Vec2 camera{2.0, 2.0};  // in room-local coordinates
  double camera_height_fraction = 0.5;
  double yaw = 0.0;
};

inline constexpr double kMinWallDistance = 0.5;
inline constexpr double kMinCornerGapPixels = 24.0;  // at width 1024

/// Seeded room. Cuboids are w x l rectangles, six-wall rooms have one corner
/// notched by 25-60% per side with the camera where it sees every corner.
/// The layout is camera-centred (camera at the origin, floor at y = 0).
/// DomainError for other wall counts; Error(invalid_layout) if rejection
/// sampling runs out of attempts.
[[nodiscard]] std::pair<RoomSpec, ManhattanLayout> gen_room(std::uint64_t seed, int wall_count);

/// Zeroes round(dropout * blobs) corner-map blobs, blurs both maps, adds
/// clipped Gaussian noise. Deterministic in seed; zero parameters are a no-op.
[[nodiscard]] maps::ProbMaps corrupt_maps(const maps::ProbMaps& maps, double blur_sigma, double noise_sigma,
                                          double dropout, std::uint64_t seed);

struct WireframeOptions {
  double line_sigma = 1.0;    // Gaussian line profile, pixels
  double background = 0.1;
  double foreground = 0.9;
  bool extra_lines = true;    // Manhattan lines on walls and floor
};

/// Grayscale panorama of the room's edges seen from its camera, with the
/// scene rotated by `rotation` (world directions d appear at rotation * d).
[[nodiscard]] geom::EquirectImage render_wireframe_panorama(const ManhattanLayout& layout, int width,
                                                           const geom::Rotation3& rotation = {},
                                                           const WireframeOptions& options = {});

}  // namespace layoutkit::synth
