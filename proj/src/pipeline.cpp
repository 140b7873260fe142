#include "layoutkit/pipeline.hpp"

#include "layoutkit/formats.hpp"

#include <toml.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace layoutkit::pipeline {

namespace fs = std::filesystem;

void validate(const PipelineConfig& cfg) {
  if (cfg.width < 64 || cfg.width % 2 != 0) throw DomainError("width must be even and at least 64");
  if (!(cfg.camera_height > 0.0)) throw DomainError("camera height must be positive");
  optimize::validate(cfg.sampler);
  for (double w : {cfg.weights.w_junc, cfg.weights.w_ceil, cfg.weights.w_floor}) {
    if (!(w >= 0.0)) throw DomainError("score weights must be non-negative");
  }
}

namespace {

template <class T>
void take(const toml::table& t, std::string_view key, T& out, std::set<std::string>& seen) {
  seen.insert(std::string(key));
  const toml::node* n = t.get(key);
  if (!n) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!n->is_boolean()) throw FormatError("config: " + std::string(key) + " must be a boolean");
    out = n->value<bool>().value();
  } else if constexpr (std::is_integral_v<T>) {
    if (!n->is_integer()) throw FormatError("config: " + std::string(key) + " must be an integer");
    out = static_cast<T>(n->value<std::int64_t>().value());
  } else {
    if (!n->is_number()) throw FormatError("config: " + std::string(key) + " must be a number");
    out = n->value<double>().value();
  }
}

void reject_unknown(const toml::table& t, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : t) {
    if (!known.count(std::string(k.str()))) throw FormatError("config: unknown key " + where + std::string(k.str()));
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw FormatError("config: [" + std::string(name) + "] must be a table");
  return n->as_table();
}

}  // namespace

void load_config(const fs::path& path, PipelineConfig& cfg) {
  if (!fs::exists(path)) throw IoError("input not found: " + path.string());
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw FormatError("config: " + std::string(e.description()));
  }
  reject_unknown(root, {"pipeline", "sampler", "weights"}, "");
  if (const auto* t = section(root, "pipeline")) {
    std::set<std::string> seen;
    take(*t, "width", cfg.width, seen);
    take(*t, "camera_height", cfg.camera_height, seen);
    take(*t, "align", cfg.align, seen);
    take(*t, "optimize", cfg.optimize, seen);
    take(*t, "keep_intermediates", cfg.keep_intermediates, seen);
    reject_unknown(*t, seen, "pipeline.");
  }
  if (const auto* t = section(root, "sampler")) {
    std::set<std::string> seen;
    auto& s = cfg.sampler;
    take(*t, "wall_shift_fraction", s.wall_shift_fraction, seen);
    take(*t, "wall_samples", s.wall_samples, seen);
    take(*t, "ceiling_samples", s.ceiling_samples, seen);
    take(*t, "floor_samples", s.floor_samples, seen);
    take(*t, "edge_sample_points", s.edge_sample_points, seen);
    take(*t, "prob_floor", s.prob_floor, seen);
    reject_unknown(*t, seen, "sampler.");
  }
  if (const auto* t = section(root, "weights")) {
    std::set<std::string> seen;
    take(*t, "w_junc", cfg.weights.w_junc, seen);
    take(*t, "w_ceil", cfg.weights.w_ceil, seen);
    take(*t, "w_floor", cfg.weights.w_floor, seen);
    reject_unknown(*t, seen, "weights.");
  }
  validate(cfg);
}

namespace {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.code(), e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Estimate estimate_layout(const maps::ProbMaps& maps, const PipelineConfig& cfg) {
  validate(cfg);
  const int width = maps.width();
  Estimate est;
  est.detected = stage("extract", [&] { return maps::extract_corners(maps.corner(), cfg.extract); });
  est.wall_count = maps::decide_wall_count(est.detected);
  est.corners = maps::strongest(est.detected, static_cast<std::size_t>(est.wall_count));

  const auto t0 = std::chrono::steady_clock::now();
  solver::LiftOptions lift;
  lift.camera_height = cfg.camera_height;
  bool any = false;
  ErrorCode last_code = ErrorCode::invalid_layout;
  std::string last_failure = "no shape variant produced a valid layout";
  for (int variant : solver::enumerate_shape_variants(est.wall_count)) {
    VariantResult r;
    r.variant = variant;
    try {
      const auto sol = solver::solve_topdown(est.corners, est.wall_count, variant);
      r.energy = sol.energy;
      r.layout = solver::lift_to_3d(sol, est.corners, width, lift);
      r.score = optimize::score_layout(r.layout, maps, cfg.weights, cfg.sampler);
      r.ok = true;
    } catch (const Error& e) {
      r.failure = e.what();
      last_code = e.code();
      last_failure = e.what();
    }
    if (r.ok && (!any || r.score > est.initial_score)) {
      any = true;
      est.initial_score = r.score;
      est.initial = r.layout;
      est.variant = variant;
    }
    est.variants.push_back(std::move(r));
  }
  est.solve_seconds = seconds_since(t0);
  if (!any) throw StageError("solve", last_code, last_failure);

  est.layout = est.initial;
  est.score = est.initial_score;
  if (cfg.optimize) {
    const auto t1 = std::chrono::steady_clock::now();
    const auto res = stage("optimize", [&] {
      return optimize::optimize_layout_detailed(est.initial, maps, cfg.sampler, cfg.weights);
    });
    est.layout = res.layout;
    est.score = res.score;
    est.candidates = res.candidates;
    est.optimize_seconds = seconds_since(t1);
  }
  return est;
}

align::AlignResult run_alignment(const geom::EquirectImage& pano, const PipelineConfig& cfg) {
  return stage("align", [&] { return align::align_panorama(pano, cfg.alignment); });
}

geom::Raster overlay(const geom::Raster& background, const ManhattanLayout& layout) {
  const int w = background.width();
  const int h = background.height();
  geom::Raster out(w, h, 3);
  const int nc = background.channels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float g = 0.0f;
      for (int c = 0; c < nc; ++c) g = std::max(g, background.at(x, y, c));
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = 0.6f * std::clamp(g, 0.0f, 1.0f);
    }
  }
  const geom::Raster masks = maps::rasterize_layout_masks(layout, w, 1.0);
  // mask channel -> overlay colour
  const int colour[3] = {1, 0, 2};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        if (masks.at(x, y, c) > 0.0f) {
          for (int k = 0; k < 3; ++k) out.at(x, y, k) = k == colour[c] ? 1.0f : 0.0f;
        }
      }
    }
  }
  return out;
}

namespace {

std::map<std::string, fs::path> json_stems(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out[e.path().stem().string()] = e.path();
  }
  return out;
}

}  // namespace

BatchSummary evaluate_batch(const fs::path& pred_dir, const fs::path& gt_dir, int width) {
  if (!fs::is_directory(gt_dir)) throw IoError("input not found: " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw IoError("input not found: " + pred_dir.string());
  const auto gt = json_stems(gt_dir);
  if (gt.empty()) throw IoError("input not found: no ground-truth layouts in " + gt_dir.string());
  const auto pred = json_stems(pred_dir);

  BatchSummary s;
  for (const auto& [stem, path] : pred) {
    if (!gt.count(stem)) s.unmatched.push_back(stem);
  }
  for (const auto& [stem, path] : gt) {
    const auto it = pred.find(stem);
    if (it == pred.end()) {
      s.unmatched.push_back(stem);
      continue;
    }
    try {
      const auto a = io::read_layout(it->second);
      const auto b = io::read_layout(path);
      s.records.push_back({stem, eval::evaluate(a, b, width)});
    } catch (const Error&) {
      s.failed.push_back(stem);
    }
  }
  std::sort(s.unmatched.begin(), s.unmatched.end());
  if (!s.records.empty()) {
    for (const auto& r : s.records) {
      s.mean.iou3d += r.metrics.iou3d;
      s.mean.corner_error += r.metrics.corner_error;
      s.mean.pixel_error += r.metrics.pixel_error;
    }
    const double n = static_cast<double>(s.records.size());
    s.mean.iou3d /= n;
    s.mean.corner_error /= n;
    s.mean.pixel_error /= n;
  }
  return s;
}

}  // namespace layoutkit::pipeline
