#pragma once

#include "layoutkit/layout.hpp"
#include "layoutkit/maps.hpp"

#include <vector>

namespace layoutkit::optimize {

using solver::ManhattanLayout;

struct ScoreWeights {
  double w_junc = 1.0;
  double w_ceil = 0.5;
  double w_floor = 1.0;
};

struct SamplerConfig {
  double wall_shift_fraction = 0.10;
  int wall_samples = 10;
  int ceiling_samples = 5;
  int floor_samples = 5;
  int edge_sample_points = 100;
  double prob_floor = 1e-4;
};

/// Throws DomainError when a count is below 1 or the shift fraction is outside (0, 1).
void validate(const SamplerConfig& cfg);

/// w_junc * sum log P_corner over the 2N corners + w_ceil * sum over walls of
/// max log P_ceil along the projected ceiling edge + w_floor * the same for
/// the floor edge. Probabilities are bilinear samples clamped to [prob_floor, 1].
/// Camera outside the footprint is a DomainError.
[[nodiscard]] double score_layout(const ManhattanLayout& layout, const maps::ProbMaps& maps,
                                  const ScoreWeights& w = {}, const SamplerConfig& cfg = {});

/// Mean ceiling-boundary probability along each wall's projected ceiling edge.
[[nodiscard]] std::vector<double> wall_confidence(const ManhattanLayout& layout, const maps::ProbMaps& maps,
                                                  const SamplerConfig& cfg = {});

/// `count` evenly spaced values covering [-f, f]; {0} when count is 1.
[[nodiscard]] std::vector<double> shift_grid(double f, int count);

struct OptimizeResult {
  ManhattanLayout layout;
  double initial_score = 0.0;
  double score = 0.0;
  int candidates = 0;  // scored candidates, skipped ones excluded
  int skipped = 0;     // invalid shifts
};

/// Greedy wall-by-wall sampling search, least confident wall first. A
/// candidate replaces the current best only when it scores strictly higher.
[[nodiscard]] OptimizeResult optimize_layout_detailed(const ManhattanLayout& initial, const maps::ProbMaps& maps,
                                                      const SamplerConfig& cfg = {}, const ScoreWeights& w = {});

[[nodiscard]] inline ManhattanLayout optimize_layout(const ManhattanLayout& initial, const maps::ProbMaps& maps,
                                                     const SamplerConfig& cfg = {}, const ScoreWeights& w = {}) {
  return optimize_layout_detailed(initial, maps, cfg, w).layout;
}

}  // namespace layoutkit::optimize
