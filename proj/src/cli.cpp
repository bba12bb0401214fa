#include "sizedepth/cli.hpp"

#include <cstdio>
#include <cstdlib>

namespace sizedepth::cli {

namespace fs = std::filesystem;

ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::schema:
    case ErrorCode::io:
      return ExitCode::schema;
    case ErrorCode::insufficient_data:
      return ExitCode::insufficient_data;
    case ErrorCode::low_consensus:
      return ExitCode::low_consensus;
    case ErrorCode::missing_plane:
    case ErrorCode::missing_translation:
    case ErrorCode::invalid_camera:
      return ExitCode::configuration;
    case ErrorCode::non_finite:
    case ErrorCode::behind_camera:
      return ExitCode::optimization;
    case ErrorCode::mismatch:
      return ExitCode::evaluation_warning;
    case ErrorCode::placement_failure:
      return ExitCode::placement;
    case ErrorCode::invalid_argument:
    case ErrorCode::index_out_of_range:
      return ExitCode::usage;
  }
  return ExitCode::usage;
}

fs::path resolve_config_path(const fs::path& path) {
  if (fs::exists(path) || path.is_absolute()) return path;
  if (const char* dir = std::getenv(kConfigDirEnv); dir != nullptr && *dir != '\0') {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate;
  }
  return path;
}

FitPlaneResult cmd_fit_plane(const FitPlaneOptions& opts) {
  io::SceneDocument doc = io::load_scene(opts.scene_path);
  DepthObservation obs = io::read_depth(opts.depth_path, opts.mask_path);
  if (opts.metric_scale) obs.metric_scale = *opts.metric_scale;
  if (obs.width != doc.scene.camera.width || obs.height != doc.scene.camera.height) {
    throw Error(ErrorCode::schema, "depth map is " + std::to_string(obs.width) + "x" + std::to_string(obs.height) +
                                       " but the scene camera is " + std::to_string(doc.scene.camera.width) + "x" +
                                       std::to_string(doc.scene.camera.height));
  }

  FitPlaneResult result;
  const Eigen::Matrix3Xd points = unproject_ground(obs, doc.scene.camera, opts.stride);
  result.points = static_cast<int>(points.cols());
  result.fit = ransac_plane(points, opts.ransac);
  result.reference_person = select_reference_person(doc.scene);
  result.anchored = anchor_plane(result.fit.plane, doc.scene, result.reference_person);

  doc.scene.plane = result.anchored;
  doc.plane_fit = io::PlaneFitInfo{static_cast<int>(result.fit.inliers.size()), result.points, result.fit.rms,
                                   result.reference_person};
  io::save_scene(opts.output_path.empty() ? opts.scene_path : opts.output_path, doc);
  return result;
}

OptimizeResult cmd_optimize(const OptimizeOptions& opts) {
  io::SceneDocument doc = io::load_scene(opts.scene_path);
  Scene scene = opts.initialize ? initialize(doc.scene) : doc.scene;

  OptimizeResult result;
  if (opts.config.freeze_z && !opts.depths.empty()) {
    if (opts.depths.size() != scene.persons.size()) {
      throw Error(ErrorCode::invalid_argument, "--depths lists " + std::to_string(opts.depths.size()) +
                                                   " values for " + std::to_string(scene.persons.size()) + " persons");
    }
    result.report = optimize_baseline(scene, opts.depths, opts.config);
  } else {
    if (!opts.depths.empty()) {
      throw Error(ErrorCode::invalid_argument, "--depths is only meaningful together with --freeze-z");
    }
    result.report = optimize(scene, opts.config);
  }

  const fs::path dir = opts.scene_path.parent_path();
  const std::string stem = opts.scene_path.stem().string();
  result.output_path = opts.output_path.empty() ? dir / (stem + ".optimized.json") : opts.output_path;
  result.trace_path = opts.trace_path.empty() ? dir / (stem + ".trace.csv") : opts.trace_path;

  doc.scene = result.report.final_scene;
  io::save_scene(result.output_path, doc);
  io::write_trace_csv(result.trace_path, result.report.loss_trace, result.report.final_loss);
  return result;
}

EvaluateResult cmd_evaluate(const EvaluateOptions& opts) {
  if (opts.est_paths.size() != opts.gt_paths.size() || opts.est_paths.empty()) {
    throw Error(ErrorCode::invalid_argument, "evaluate needs matching, nonempty --est and --gt lists");
  }
  EvaluateResult result;
  std::vector<Scene> est, gt;
  for (std::size_t f = 0; f < opts.est_paths.size(); ++f) {
    Scene e = io::load_scene(opts.est_paths[f]).scene;
    Scene g = io::load_scene(opts.gt_paths[f]).scene;
    if (e.persons.size() != g.persons.size()) {
      result.warnings.push_back("frame " + std::to_string(f) + " (" + opts.est_paths[f].string() +
                                "): person count mismatch, estimate " + std::to_string(e.persons.size()) +
                                " vs ground truth " + std::to_string(g.persons.size()) + "; skipped");
      ++result.frames_skipped;
      continue;
    }
    if (g.persons.size() < 2) {
      result.warnings.push_back("frame " + std::to_string(f) + " (" + opts.est_paths[f].string() +
                                "): fewer than two persons, no pairs to evaluate");
    }
    est.push_back(std::move(e));
    gt.push_back(std::move(g));
  }
  result.report = evaluate_metrics(est, gt);
  if (!opts.json_path.empty()) io::write_text(opts.json_path, io::to_json(result.report).dump(2) + "\n");
  return result;
}

std::string format_report(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "d_ord  = %.2f %%\nd_norm = %.4f\nh_ord  = %.2f %%\nframes = %d, pairs = %d\n", r.d_ord, r.d_norm,
                r.h_ord, r.frames_evaluated, r.pairs_evaluated);
  return buf;
}

SynthResult cmd_synth(const SynthOptions& opts) {
  SynthResult result;
  fs::path config_path = opts.config_path;
  if (config_path.empty()) {
    if (const char* dir = std::getenv(kConfigDirEnv); dir != nullptr && *dir != '\0') {
      const fs::path candidate = fs::path(dir) / "synth.json";
      if (fs::exists(candidate)) config_path = candidate;
    }
  } else {
    config_path = resolve_config_path(config_path);
  }
  result.config = config_path.empty() ? SynthConfig{} : io::synth_config_from_json(io::read_json(config_path));
  if (opts.seed) result.config.rng_seed = *opts.seed;
  if (opts.frames < 1) throw Error(ErrorCode::invalid_argument, "frames must be at least 1");

  fs::create_directories(opts.out_dir);
  io::write_text(opts.out_dir / "synth_config.json", io::to_json(result.config).dump(2) + "\n");
  if (result.config.n_persons < 2) {
    result.warnings.push_back("n_persons < 2: pairwise metrics will skip these frames");
  }
  for (int f = 0; f < opts.frames; ++f) {
    SynthConfig cfg = result.config;
    cfg.rng_seed = result.config.rng_seed + static_cast<std::uint64_t>(f);
    const SyntheticScene s = generate_scene(cfg);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d", f);
    const fs::path dir = opts.out_dir / name;
    fs::create_directories(dir);
    io::save_scene(dir / "scene.json", io::SceneDocument{s.observed, std::nullopt});
    io::save_scene(dir / "gt.json", io::SceneDocument{s.gt, std::nullopt});
    io::write_depth(dir / "depth.f32", dir / "mask.u8", s.depth);
    result.frame_dirs.push_back(dir);
  }
  return result;
}

}  // namespace sizedepth::cli
