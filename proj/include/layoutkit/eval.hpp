#pragma once

#include "layoutkit/error.hpp"
#include "layoutkit/layout.hpp"

#include <span>
#include <vector>

namespace layoutkit::eval {

using solver::ManhattanLayout;

struct LayoutMetrics {
  double iou3d = 0.0;         // [0, 1]
  double corner_error = 0.0;  // percent of the image diagonal
  double pixel_error = 0.0;   // percent of pixels
};

inline constexpr int kIouGrid = 1024;

/// Volume IoU of two extruded footprints. Areas come from the same scanline
/// raster (kIouGrid rows over the union bounding box, exact spans per row),
/// times the vertical overlap. Zero-height layouts are a DomainError.
[[nodiscard]] double iou3d(const ManhattanLayout& a, const ManhattanLayout& b, int grid = kIouGrid);

/// Rasterized footprint area on the scanline grid used by iou3d.
[[nodiscard]] double raster_area(std::span<const geom::Vec2> poly, double z0, double z1, int rows);

struct CornerErrorResult {
  double percent = 0.0;
  int padded = 0;   // ground-truth corners matched to the image-centre pad
  int skipped = 0;  // surplus predicted corners left unmatched
};

/// Mean image-space distance between matched corner points as a percentage
/// of sqrt(W^2 + H^2). Columns are matched by the circular order-preserving
/// assignment with the smallest total wraparound-aware distance; each column
/// contributes its top and bottom corner points. Empty truth is a DomainError.
[[nodiscard]] CornerErrorResult corner_error(const maps::CornerSet& pred, const maps::CornerSet& gt, int width);
[[nodiscard]] CornerErrorResult corner_error(const ManhattanLayout& pred, const ManhattanLayout& gt, int width);

enum class Surface : unsigned char { ceiling = 0, wall = 1, floor = 2 };

/// Per-pixel surface class of the layout seen from its camera, row-major.
[[nodiscard]] std::vector<Surface> surface_labels(const ManhattanLayout& layout, int width);

/// Percentage of equirect pixels whose surface class differs.
[[nodiscard]] double pixel_error(const ManhattanLayout& pred, const ManhattanLayout& gt, int width);

[[nodiscard]] LayoutMetrics evaluate(const ManhattanLayout& pred, const ManhattanLayout& gt, int width);

}  // namespace layoutkit::eval
