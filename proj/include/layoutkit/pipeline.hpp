#pragma once

#include "layoutkit/align.hpp"
#include "layoutkit/error.hpp"
#include "layoutkit/eval.hpp"
#include "layoutkit/maps.hpp"
#include "layoutkit/optimize.hpp"
#include "layoutkit/solver.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace layoutkit::pipeline {

using solver::ManhattanLayout;

struct PipelineConfig {
  int width = 1024;
  double camera_height = 1.0;
  bool align = true;
  bool optimize = true;
  bool keep_intermediates = false;
  optimize::SamplerConfig sampler{};
  optimize::ScoreWeights weights{};
  maps::ExtractOptions extract{};
  align::AlignOptions alignment{};
};

/// DomainError on odd or too-small width, non-positive camera height or a bad sampler config.
void validate(const PipelineConfig& cfg);

/// Overrides from a TOML file with optional tables [pipeline] (width,
/// camera_height, align, optimize, keep_intermediates), [sampler] and
/// [weights] using the SamplerConfig / ScoreWeights field names. Unknown keys
/// and wrong types are a FormatError.
void load_config(const std::filesystem::path& path, PipelineConfig& cfg);

/// An error raised inside a named stage; keeps the original code.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& what)
      : Error(code, stage + ": " + what), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct VariantResult {
  int variant = 0;
  bool ok = false;
  std::string failure;  // why the variant was dropped
  double energy = 0.0;
  double score = 0.0;
  ManhattanLayout layout;
};

struct Estimate {
  maps::CornerSet detected;  // every column peak
  maps::CornerSet corners;   // the wall_count strongest
  int wall_count = 4;
  int variant = 0;
  std::vector<VariantResult> variants;
  ManhattanLayout initial;  // best lifted variant
  ManhattanLayout layout;   // after optimization
  double initial_score = 0.0;
  double score = 0.0;
  int candidates = 0;
  double solve_seconds = 0.0;
  double optimize_seconds = 0.0;
};

/// extract -> decide wall count -> solve every shape variant -> lift -> keep
/// the best scored -> optimize (unless disabled). Stage failures surface as StageError.
[[nodiscard]] Estimate estimate_layout(const maps::ProbMaps& maps, const PipelineConfig& cfg);

/// Maps of an aligned panorama are produced by an external predictor; the
/// pipeline only levels the image and emits the Manhattan line map.
[[nodiscard]] align::AlignResult run_alignment(const geom::EquirectImage& pano, const PipelineConfig& cfg);

/// RGB overlay: gray background with the layout's ceiling, floor and wall
/// edges drawn in red, blue and green.
[[nodiscard]] geom::Raster overlay(const geom::Raster& background, const ManhattanLayout& layout);

struct BatchRecord {
  std::string id;
  eval::LayoutMetrics metrics;
};

struct BatchSummary {
  std::vector<BatchRecord> records;
  std::vector<std::string> unmatched;  // stems present on one side only
  std::vector<std::string> failed;     // stems whose files could not be read or evaluated
  eval::LayoutMetrics mean;            // over records; iou3d as a fraction
};

/// Pairs <stem>.json files across the two directories and evaluates each
/// prediction against its ground truth at the given equirect width. An empty
/// or missing ground-truth directory is an IoError.
[[nodiscard]] BatchSummary evaluate_batch(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                                          int width);

}  // namespace layoutkit::pipeline
