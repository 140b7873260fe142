#include "layoutkit/formats.hpp"
#include "layoutkit/pipeline.hpp"
#include "layoutkit/raster_io.hpp"
#include "layoutkit/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>

using namespace layoutkit;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitInputNotFound = 2;

struct InputNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw InputNotFound(p.string());
}

// Options shared by the pipeline subcommands.
struct Common {
  std::optional<int> width;
  std::optional<double> camera_height;
  bool no_align = false;
  bool no_optimize = false;
  bool keep = false;
  std::string config;

  void add(CLI::App* app, bool stages) {
    app->add_option("--width", width, "equirect width, even");
    app->add_option("--camera-height", camera_height, "metric camera height");
    app->add_option("--config", config, "TOML config file");
    if (stages) {
      app->add_flag("--no-align", no_align, "skip panorama alignment");
      app->add_flag("--no-optimize", no_optimize, "skip layout optimization");
      app->add_flag("--keep-intermediates", keep, "write every intermediate result");
    }
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig cfg;
    if (!config.empty()) {
      require_file(config);
      pipeline::load_config(config, cfg);
    }
    if (width) cfg.width = *width;
    if (camera_height) cfg.camera_height = *camera_height;
    if (no_align) cfg.align = false;
    if (no_optimize) cfg.optimize = false;
    if (keep) cfg.keep_intermediates = true;
    pipeline::validate(cfg);
    return cfg;
  }
};

geom::Raster read_image(const fs::path& p) {
  require_file(p);
  if (p.extension() == ".png") return io::read_png(p);
  return io::read_eqmp(p);
}

std::string alignment_json(const align::AlignResult& r) {
  json j;
  j["rotation_angle_deg"] = r.rotation_angle * 180.0 / geom::kPi;
  json axes = json::array();
  for (const auto& a : r.basis.axes) axes.push_back({a.x(), a.y(), a.z()});
  j["axes"] = axes;
  j["vote_scores"] = r.basis.vote_scores;
  json m = json::array();
  for (int i = 0; i < 3; ++i) m.push_back({r.leveling.matrix()(i, 0), r.leveling.matrix()(i, 1), r.leveling.matrix()(i, 2)});
  j["leveling"] = m;
  j["segments"] = r.segments.size();
  return j.dump(2);
}

void write_alignment(const fs::path& out, const align::AlignResult& r) {
  io::write_png(out / "aligned.png", r.aligned);
  io::write_eqmp(out / "line_map.eqmp", r.line_map);
  io::write_png(out / "line_map.png", r.line_map);
  io::write_text(out / "alignment.json", alignment_json(r));
}

// run ------------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::string pano;
  std::string maps;
  std::string gt;
  std::string out = "out";
};

int run(const RunArgs& a) {
  if (a.pano.empty() && a.maps.empty()) throw CLI::ValidationError("run", "one of --pano or --maps is required");
  auto cfg = a.common.resolve();
  std::optional<solver::ManhattanLayout> gt;
  if (!a.gt.empty()) {
    require_file(a.gt);
    gt = io::read_layout(a.gt);
    if (!a.common.camera_height) cfg.camera_height = gt->camera_height;
  }
  std::optional<geom::Raster> pano;
  if (!a.pano.empty()) pano = read_image(a.pano);
  std::optional<maps::ProbMaps> prob;
  if (!a.maps.empty()) prob = maps::ProbMaps::from_raster(read_image(a.maps));
  const fs::path out = a.out;
  fs::create_directories(out);

  if (pano) {
    if (cfg.align) {
      const auto r = pipeline::run_alignment(geom::EquirectImage(*pano), cfg);
      write_alignment(out, r);
      std::printf("align: rotation %.4f deg from %zu segments\n", r.rotation_angle * 180.0 / geom::kPi,
                  r.segments.size());
    } else {
      std::printf("align: skipped\n");
    }
    if (!prob) {
      std::printf("no --maps given; boundary and corner maps come from an external predictor\n");
      return 0;
    }
  }

  if (cfg.width != prob->width()) {
    if (a.common.width) throw DomainError("--width does not match the maps width");
    cfg.width = prob->width();
  }
  const auto est = pipeline::estimate_layout(*prob, cfg);
  io::write_layout(out / "layout.json", est.layout);
  io::write_png(out / "overlay.png", pipeline::overlay(pano ? *pano : prob->to_raster(), est.layout));
  if (cfg.keep_intermediates) {
    io::write_text(out / "corners_detected.json", io::corners_to_json(est.detected));
    io::write_text(out / "corners.json", io::corners_to_json(est.corners));
    io::write_layout(out / "layout_initial.json", est.initial);
    for (const auto& v : est.variants) {
      if (v.ok) io::write_layout(out / ("variant_" + std::to_string(v.variant) + ".json"), v.layout);
    }
    io::write_eqmp(out / "maps.eqmp", prob->to_raster());
  }
  std::printf("walls %d, variant %d, score %.4f -> %.4f, solve %.3fs, optimize %.3fs\n", est.wall_count, est.variant,
              est.initial_score, est.score, est.solve_seconds, est.optimize_seconds);
  if (gt) {
    const auto m = eval::evaluate(est.layout, *gt, cfg.width);
    std::string id = fs::path(a.maps).stem().string();
    if (id.ends_with(".maps")) id.resize(id.size() - 5);
    io::write_text(out / "metrics.jsonl", io::metrics_record(id, m));
    std::printf("iou3d %.2f%%  corner %.4f%%  pixel %.4f%%\n", 100.0 * m.iou3d, m.corner_error, m.pixel_error);
  }
  return 0;
}

// synth ------------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::uint64_t seed = 0;
  int count = 1;
  int walls = 4;
  double blur = 0.0;
  double noise = 0.0;
  double dropout = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  std::string out = "synth";
};

int synth_rooms(const SynthArgs& a) {
  const auto cfg = a.common.resolve();
  const fs::path out = a.out;
  fs::create_directories(out);
  const auto R = geom::Rotation3::pitch(a.pitch * geom::kPi / 180.0) * geom::Rotation3::roll(a.roll * geom::kPi / 180.0);
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    const auto [spec, L] = synth::gen_room(seed, a.walls);
    const std::string id = "room_" + std::to_string(seed);
    io::write_layout(out / (id + ".json"), L);
    const auto m = synth::corrupt_maps(maps::render_ground_truth(L, cfg.width), a.blur, a.noise, a.dropout, seed);
    io::write_eqmp(out / (id + ".maps.eqmp"), m.to_raster());
    io::write_png(out / (id + ".pano.png"), synth::render_wireframe_panorama(L, cfg.width, R));
  }
  std::printf("wrote %d rooms to %s\n", a.count, out.string().c_str());
  return 0;
}

// gen-gt -----------------------------------------------------------------------

struct GenGtArgs {
  Common common;
  std::string layout;
  std::string out;
  std::string preview;
};

int gen_gt(const GenGtArgs& a) {
  const auto cfg = a.common.resolve();
  require_file(a.layout);
  const auto L = io::read_layout(a.layout);
  const auto m = maps::render_ground_truth(L, cfg.width);
  io::write_eqmp(a.out, m.to_raster());
  if (!a.preview.empty()) io::write_png(a.preview, pipeline::overlay(m.to_raster(), L));
  return 0;
}

// align ------------------------------------------------------------------------

struct AlignArgs {
  Common common;
  std::string pano;
  std::string out = "aligned";
};

int align_cmd(const AlignArgs& a) {
  const auto cfg = a.common.resolve();
  const auto pano = read_image(a.pano);
  fs::create_directories(a.out);
  const auto r = pipeline::run_alignment(geom::EquirectImage(pano), cfg);
  write_alignment(a.out, r);
  std::printf("rotation %.4f deg from %zu segments\n", r.rotation_angle * 180.0 / geom::kPi, r.segments.size());
  return 0;
}

// eval -------------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred;
  std::string gt;
  std::string out = "metrics.jsonl";
};

int eval_cmd(const EvalArgs& a) {
  const auto cfg = a.common.resolve();
  if (!fs::is_directory(a.pred)) throw InputNotFound(a.pred);
  const auto s = pipeline::evaluate_batch(a.pred, a.gt, cfg.width);
  std::string lines;
  for (const auto& r : s.records) lines += io::metrics_record(r.id, r.metrics) + "\n";
  if (!lines.empty()) lines.pop_back();
  io::write_text(a.out, lines);
  std::printf("%-10s | %-12s | %-16s | %-15s\n", "images", "3D IoU (%)", "Corner error (%)", "Pixel error (%)");
  std::printf("%-10zu | %12.2f | %16.4f | %15.4f\n", s.records.size(), 100.0 * s.mean.iou3d, s.mean.corner_error,
              s.mean.pixel_error);
  for (const auto& u : s.unmatched) std::printf("unmatched: %s\n", u.c_str());
  for (const auto& f : s.failed) std::printf("failed: %s\n", f.c_str());
  return s.unmatched.empty() && s.failed.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manhattan room layout toolkit"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "estimate a layout from probability maps, aligning a panorama if given");
  run_args.common.add(run_cmd, true);
  run_cmd->add_option("--pano", run_args.pano, "panorama (PNG or EQMP)");
  run_cmd->add_option("--maps", run_args.maps, "boundary and corner maps (4-channel EQMP)");
  run_cmd->add_option("--gt", run_args.gt, "ground-truth layout JSON for metrics");
  run_cmd->add_option("--out", run_args.out, "output directory");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate seeded rooms with maps and wireframe panoramas");
  synth_args.common.add(synth_cmd, false);
  synth_cmd->add_option("--seed", synth_args.seed, "first seed");
  synth_cmd->add_option("--count", synth_args.count, "number of rooms")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--walls", synth_args.walls, "4 or 6")->check(CLI::IsMember({4, 6}));
  synth_cmd->add_option("--blur", synth_args.blur, "map blur sigma, pixels");
  synth_cmd->add_option("--noise", synth_args.noise, "map noise sigma");
  synth_cmd->add_option("--dropout", synth_args.dropout, "fraction of corner blobs removed");
  synth_cmd->add_option("--pitch", synth_args.pitch, "panorama pitch, degrees");
  synth_cmd->add_option("--roll", synth_args.roll, "panorama roll, degrees");
  synth_cmd->add_option("--out", synth_args.out, "output directory");

  GenGtArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-gt", "render ground-truth maps for a layout");
  gen_args.common.add(gen_cmd, false);
  gen_cmd->add_option("--layout", gen_args.layout, "layout JSON")->required();
  gen_cmd->add_option("--out", gen_args.out, "output EQMP")->required();
  gen_cmd->add_option("--preview", gen_args.preview, "optional PNG preview");

  AlignArgs align_args;
  auto* align_sub = app.add_subcommand("align", "level a panorama and write its Manhattan line map");
  align_args.common.add(align_sub, false);
  align_sub->add_option("--pano", align_args.pano, "panorama (PNG or EQMP)")->required();
  align_sub->add_option("--out", align_args.out, "output directory");

  EvalArgs eval_args;
  auto* eval_sub = app.add_subcommand("eval", "evaluate predicted layouts against ground truth");
  eval_args.common.add(eval_sub, false);
  eval_sub->add_option("--pred", eval_args.pred, "directory of predicted layout JSON")->required();
  eval_sub->add_option("--gt", eval_args.gt, "directory of ground-truth layout JSON")->required();
  eval_sub->add_option("--out", eval_args.out, "metrics JSONL");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(run_args);
    if (*synth_cmd) return synth_rooms(synth_args);
    if (*gen_cmd) return gen_gt(gen_args);
    if (*align_sub) return align_cmd(align_args);
    if (*eval_sub) return eval_cmd(eval_args);
  } catch (const InputNotFound& e) {
    std::fprintf(stderr, "error: input not found: %s\n", e.what());
    return kExitInputNotFound;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const pipeline::StageError& e) {
    std::fprintf(stderr, "error: stage %s [%s]: %s\n", e.stage().c_str(), std::string(to_string(e.code())).c_str(),
                 e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return std::string_view(e.what()).starts_with("input not found") ? kExitInputNotFound : 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  }
  return 0;
}
