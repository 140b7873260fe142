#pragma once

#include "layoutkit/error.hpp"
#include "layoutkit/geom.hpp"
#include "layoutkit/layout.hpp"

#include <variant>
#include <vector>

namespace layoutkit::maps {

using geom::EquirectImage;

enum BoundaryChannel : int { kWallWall = 0, kCeilingWall = 1, kWallFloor = 2 };

/// Boundary map (3 channels) and corner map (1 channel), values in [0, 1].
class ProbMaps {
 public:
  ProbMaps() = default;
  /// Throws DomainError on mismatched sizes, wrong channel counts or values outside [0, 1].
  ProbMaps(EquirectImage boundary, EquirectImage corner);
  /// All-`fill` maps of the given width.
  static ProbMaps uniform(int width, float fill);

  [[nodiscard]] const EquirectImage& boundary() const noexcept { return boundary_; }
  [[nodiscard]] const EquirectImage& corner() const noexcept { return corner_; }
  [[nodiscard]] int width() const noexcept { return corner_.width(); }
  [[nodiscard]] int height() const noexcept { return corner_.height(); }

  /// Four-channel raster: wall-wall, ceiling-wall, wall-floor, corner.
  [[nodiscard]] geom::Raster to_raster() const;
  [[nodiscard]] static ProbMaps from_raster(const geom::Raster& r);

 private:
  EquirectImage boundary_;
  EquirectImage corner_;
};

struct GroundTruthOptions {
  double dilation_radius = 4.0;  // pixels
  int kernel_size = 20;          // Gaussian taps per axis
  double sigma = 20.0 / 6.0;     // pixels
};

/// Renders smoothed target maps for a layout. Camera outside the polygon is a DomainError.
[[nodiscard]] ProbMaps render_ground_truth(const solver::ManhattanLayout& layout, int width,
                                           const GroundTruthOptions& options = {});

/// Binary pre-smoothing masks (dilated projections), channels as in ProbMaps::to_raster.
[[nodiscard]] geom::Raster rasterize_layout_masks(const solver::ManhattanLayout& layout, int width,
                                                  double dilation_radius);

/// Separable Gaussian with `taps` integer offsets starting at -taps/2; wraps
/// horizontally and zero-pads vertically.
[[nodiscard]] geom::Raster gaussian_blur(const geom::Raster& src, double sigma, int taps);

/// 8-connected components of positive values in one channel, wrapping
/// horizontally. Label -1 marks non-positive pixels.
struct BlobLabels {
  std::vector<int> label;  // row-major, one per pixel
  int count = 0;
};
[[nodiscard]] BlobLabels label_blobs(const geom::Raster& r, int channel);

/// Scales each 8-connected nonzero component of each channel to peak 1.
void normalize_blobs(geom::Raster& r);

struct Roll {
  int k = 0;
};
struct Flip {};
struct Gamma {
  double gamma = 1.0;
};
using Augmentation = std::variant<Roll, Flip, Gamma>;

/// Roll shifts columns right by k (circularly); flip mirrors columns; gamma
/// raises each value (clamped to [0, 1]) to the power gamma, 0.5 <= gamma <= 2.
[[nodiscard]] EquirectImage augment(const EquirectImage& img, const Augmentation& mode);
/// Maps accept roll and flip only; gamma is a DomainError.
[[nodiscard]] ProbMaps augment(const ProbMaps& maps, const Augmentation& mode);

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double tau = 0.01;
  double background_reweight = 0.2;  // weight of pixels with target < 0.01
};

/// Weighted mean binary cross-entropy over every map entry, predictions clamped to [1e-7, 1 - 1e-7].
[[nodiscard]] double binary_cross_entropy(const geom::Raster& pred, const geom::Raster& target,
                                          double background_reweight);

/// alpha * BCE(boundary) + beta * BCE(corner) + tau * ||d_pred - d_gt||_2.
[[nodiscard]] double eval_loss(const ProbMaps& pred, const ProbMaps& gt, const solver::CuboidParams& d_pred,
                               const solver::CuboidParams& d_gt, const LossWeights& w = {});

struct ExtractOptions {
  int min_separation = 20;       // pixels between column peaks, wraparound-aware
  double floor_fraction = 0.05;  // of the strongest column response
  int profile_half_width = 2;    // columns averaged into the row profile
  int conf_half_window = 2;      // corner confidence window is (2h+1)^2
};

/// Fewer than four column peaks; carries whatever was found.
class InsufficientCorners : public Error {
 public:
  InsufficientCorners(const std::string& what, CornerSet found)
      : Error(ErrorCode::insufficient_corners, what), found_(std::move(found)) {}
  [[nodiscard]] const CornerSet& found() const noexcept { return found_; }

 private:
  CornerSet found_;
};

/// Every column peak that survives the floor and NMS, sorted by column. Never throws.
[[nodiscard]] CornerSet detect_corners(const EquirectImage& corner_map, const ExtractOptions& options = {});

/// detect_corners, throwing InsufficientCorners below four peaks.
[[nodiscard]] CornerSet extract_corners(const EquirectImage& corner_map, const ExtractOptions& options = {});

/// The n strongest corners by column response, re-sorted by column.
[[nodiscard]] CornerSet strongest(const CornerSet& set, std::size_t n);

inline constexpr double kSixWallThreshold = 0.05;

/// 6 when the sixth strongest column's mean probability is at least 0.05, else 4.
[[nodiscard]] int decide_wall_count(const CornerSet& detected);
[[nodiscard]] int decide_wall_count(const EquirectImage& corner_map, const ExtractOptions& options = {});

}  // namespace layoutkit::maps
