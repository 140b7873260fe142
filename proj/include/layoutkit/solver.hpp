#pragma once

#include "layoutkit/error.hpp"
#include "layoutkit/layout.hpp"
#include "layoutkit/lbfgs.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace layoutkit::solver {

/// Concavity assignments to try for a wall count: {0} for 4 walls, {0..5}
/// for 6 walls where variant k makes vertex k the reflex corner.
[[nodiscard]] std::vector<int> enumerate_shape_variants(int wall_count);

/// Angles subtended by consecutive corner pairs, 2*pi * (column gap / width).
[[nodiscard]] std::vector<double> corner_gap_angles(const maps::CornerSet& corners);

/// Unsigned angle at `camera` between consecutive vertices.
[[nodiscard]] double vertex_angle(const Vec2& a, const Vec2& b, const Vec2& camera);

/// Sum over consecutive vertex pairs of (angle at camera - target)^2.
[[nodiscard]] double topdown_energy(std::span<const Vec2> vertices, const Vec2& camera,
                                    std::span<const double> target_angles);

/// The corner-angle energy expressed over free rectilinear parameters.
///
/// Edge e runs from vertex e to e+1. Even edges lie along x, odd edges along
/// z; their signs follow from the variant's turn pattern. Edge lengths are
/// exp(q) on the positive-signed edges of each axis, and the negative-signed
/// edges share the same total so the polygon always closes. Vertex 0 sits at
/// the origin and edge 0 has unit length along +x. The camera position
/// occupies the last two parameters.
class TopDownEnergy {
 public:
  TopDownEnergy(std::vector<double> target_angles, int variant);

  [[nodiscard]] int wall_count() const noexcept { return static_cast<int>(targets_.size()); }
  [[nodiscard]] int parameter_count() const noexcept { return free_count_ + 2; }
  [[nodiscard]] int variant() const noexcept { return variant_; }

  double operator()(const Eigen::VectorXd& p, Eigen::VectorXd& grad) const;
  [[nodiscard]] double value(const Eigen::VectorXd& p) const;

  [[nodiscard]] std::vector<Vec2> vertices(const Eigen::VectorXd& p) const;
  [[nodiscard]] Vec2 camera(const Eigen::VectorXd& p) const;

  /// Vertices on the unit circle at the observed angles, camera at `camera`.
  [[nodiscard]] Eigen::VectorXd initial_shape() const;
  [[nodiscard]] Eigen::VectorXd with_camera(Eigen::VectorXd p, const Vec2& camera) const;

  /// Parameters reproducing a rectilinear polygon with this variant's turn
  /// pattern (normalized so vertex 0 is the origin and edge 0 is unit +x).
  [[nodiscard]] Eigen::VectorXd parameters_for(std::span<const Vec2> normalized_vertices,
                                               const Vec2& normalized_camera) const;

 private:
  void lengths(const Eigen::VectorXd& p, std::vector<double>& q, std::vector<double>& len) const;

  std::vector<double> targets_;
  int variant_ = 0;
  std::vector<Vec2> dir_;       // unit direction of each edge
  std::vector<int> axis_;       // 0 = x, 1 = z
  std::vector<bool> positive_;  // sign along the axis
  std::vector<int> free_;       // parameter index per edge, -1 when fixed
  int free_count_ = 0;
};

struct TopDownOptions {
  LbfgsOptions lbfgs{};
  int camera_grid = 7;  // extra multi-start camera positions per axis
};

/// Solver-normalized top-down layout: vertex 0 at the origin, |v0 - v1| = 1.
struct TopDownSolution {
  std::vector<Vec2> vertices;
  Vec2 camera{0.0, 0.0};
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
  int variant = 0;
};

/// Recovers the rectilinear top-down shape and camera from corner columns.
/// Corner count must equal wall_count (DomainError). Throws
/// Error(invalid_layout) when no start yields a simple polygon around the camera.
[[nodiscard]] TopDownSolution solve_topdown(const maps::CornerSet& corners, int wall_count, int variant,
                                            const TopDownOptions& options = {});

/// A bottom corner at or above the horizon.
class HorizonViolation : public Error {
 public:
  explicit HorizonViolation(const std::string& what) : Error(ErrorCode::horizon_violation, what) {}
};

struct LiftOptions {
  double camera_height = 1.0;
};

/// Places the solution in the camera frame (camera at the origin, floor at
/// y = 0) with metric scale from the floor-corner elevations and the ceiling
/// at the mean top-corner height.
[[nodiscard]] ManhattanLayout lift_to_3d(const TopDownSolution& topdown, const maps::CornerSet& corners, int width,
                                         const LiftOptions& options = {});

/// Solver-normalized form of an arbitrary layout, starting at vertex `first`.
[[nodiscard]] TopDownSolution normalize_layout(const ManhattanLayout& layout, int first);

}  // namespace layoutkit::solver
