#pragma once

#include "layoutkit/geom.hpp"

#include <span>
#include <vector>

namespace layoutkit::geom {

/// Shoelace area in the (x, z) plane; negative for increasing-azimuth order.
[[nodiscard]] double signed_area(std::span<const Vec2> poly);
[[nodiscard]] inline double polygon_area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }

/// Even-odd point containment. Points on the boundary count as outside.
[[nodiscard]] bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly);

/// No two non-adjacent edges touch and adjacent edges meet only at their shared vertex.
[[nodiscard]] bool is_simple_polygon(std::span<const Vec2> poly);

[[nodiscard]] double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance from p to the nearest polygon edge.
[[nodiscard]] double distance_to_boundary(const Vec2& p, std::span<const Vec2> poly);

/// Distance along the ray origin + t * dir to the first polygon edge hit, or +inf.
[[nodiscard]] double ray_polygon_distance(const Vec2& origin, const Vec2& dir, std::span<const Vec2> poly);

/// Exact clip of a polygon against a convex clip polygon (Sutherland-Hodgman).
[[nodiscard]] std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

}  // namespace layoutkit::geom
