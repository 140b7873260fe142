#pragma once

// Room layout types shared across modules.
//
// A ManhattanLayout stores wall footprints in the world (x, z) plane, ordered
// by increasing azimuth as seen from the camera (negative shoelace area).
// Consecutive edges are perpendicular; the Manhattan frame may be rotated
// about y, which is how a cuboid's rotation is represented.

#include "layoutkit/geom.hpp"

#include <optional>
#include <string>
#include <vector>

namespace layoutkit::maps {

/// One wall-wall junction column with its ceiling and floor corner rows.
struct Corner {
  double u = 0.0;      // column, pixels
  double v_top = 0.0;  // ceiling-wall corner row
  double v_bot = 0.0;  // wall-floor corner row
  double conf = 0.0;   // mean corner-map value around the two corners
  double response = 0.0;  // summed column response (not serialized)
};

/// Corners sorted by column, pairwise at least `kMinColumnGap` apart.
struct CornerSet {
  std::vector<Corner> corners;
  int width = 0;

  [[nodiscard]] std::size_t size() const noexcept { return corners.size(); }
};

}  // namespace layoutkit::maps

namespace layoutkit::solver {

using geom::Vec2;
using geom::Vec3;

struct ManhattanLayout {
  std::vector<Vec2> vertices;  // (x, z)
  Vec2 camera{0.0, 0.0};       // (x, z)
  double camera_height = 1.0;  // y of the camera centre
  double floor = 0.0;          // y of the floor plane
  double ceiling = 2.0;        // y of the ceiling plane

  [[nodiscard]] int wall_count() const noexcept { return static_cast<int>(vertices.size()); }
  [[nodiscard]] Vec3 camera_position() const { return {camera.x(), camera_height, camera.y()}; }
  [[nodiscard]] Vec3 floor_corner(int i) const;
  [[nodiscard]] Vec3 ceiling_corner(int i) const;

  friend bool operator==(const ManhattanLayout&, const ManhattanLayout&) = default;
};

/// Reason the layout violates an invariant, or nullopt when valid.
[[nodiscard]] std::optional<std::string> layout_violation(const ManhattanLayout& layout);
/// Throws Error(invalid_layout) on any invariant violation.
void validate(const ManhattanLayout& layout);
[[nodiscard]] inline bool is_valid(const ManhattanLayout& layout) { return !layout_violation(layout); }

/// Reverses vertex order if needed so vertices run in increasing azimuth.
[[nodiscard]] ManhattanLayout oriented(ManhattanLayout layout);

/// Angle of the layout's Manhattan frame, in [-pi/4, pi/4).
[[nodiscard]] double manhattan_yaw(const ManhattanLayout& layout);

/// Index of the vertex with the smallest projected column.
[[nodiscard]] int first_vertex_by_column(const ManhattanLayout& layout, int width);

/// Reflex (concave) vertex indices.
[[nodiscard]] std::vector<int> reflex_vertices(const ManhattanLayout& layout);

/// Projected corners, one per vertex, sorted by column.
[[nodiscard]] maps::CornerSet project_corners(const ManhattanLayout& layout, int width);

/// Pixel position of a world point seen from the layout's camera.
[[nodiscard]] geom::PixelCoord project(const ManhattanLayout& layout, const Vec3& point, int width);

/// Layout rotated about the camera by `angle` (positive increases azimuth).
[[nodiscard]] ManhattanLayout yawed(const ManhattanLayout& layout, double angle);

/// Cuboid parameters: width along the rotated x axis, length along the rotated
/// z axis, height floor-to-ceiling, centre offset from the camera, rotation.
struct CuboidParams {
  double s_w = 1.0;
  double s_l = 1.0;
  double s_h = 1.0;
  double t_x = 0.0;
  double t_z = 0.0;
  double r_theta = 0.0;

  [[nodiscard]] std::array<double, 6> as_array() const { return {s_w, s_l, s_h, t_x, t_z, r_theta}; }
};

/// Canonical form: r_theta in [-pi/4, pi/4), swapping s_w/s_l as needed.
[[nodiscard]] CuboidParams canonical(const CuboidParams& d);

/// Camera at the origin, floor at y = 0.
[[nodiscard]] ManhattanLayout layout_from_params(const CuboidParams& d, double camera_height);
/// Throws DomainError for layouts that are not four-walled.
[[nodiscard]] CuboidParams params_from_layout(const ManhattanLayout& layout);

}  // namespace layoutkit::solver
