// sizedepth: ground-plane-constrained translation/scale refinement for
// multi-person scenes.
//
//   sizedepth synth     --out DIR [--config synth.json] [--frames N] [--seed S]
//   sizedepth fit-plane --depth D.f32 --mask M.u8 --scene S.json [-o OUT]
//   sizedepth optimize  SCENE.json... [--lr --iters --lambda --mode --freeze-z --depths]
//   sizedepth evaluate  --est E.json... --gt G.json... [--json report.json]

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "sizedepth/cli.hpp"

using namespace sizedepth;
namespace fs = std::filesystem;

namespace {

int fail(const Error& e) {
  std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
  return static_cast<int>(cli::exit_code_for(e.code()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-person scale/depth disambiguation with a ground-plane constraint"};
  app.require_subcommand(1);

  // synth
  cli::SynthOptions synth;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic test set");
  synth_cmd->add_option("--config", synth.config_path, "Synth config JSON (relative paths also searched in $SIZEDEPTH_CONFIG_DIR)");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--frames", synth.frames, "Number of frames (seed, seed+1, ...)")->check(CLI::PositiveNumber);
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the config seed");

  // fit-plane
  cli::FitPlaneOptions fit;
  auto* fit_cmd = app.add_subcommand("fit-plane", "Fit and anchor the ground plane, writing it into the scene");
  fit_cmd->add_option("--depth", fit.depth_path, "Raw float32 depth payload (header at <path>.json)")->required();
  fit_cmd->add_option("--mask", fit.mask_path, "8-bit ground mask")->required();
  fit_cmd->add_option("--scene", fit.scene_path, "Scene JSON to update")->required();
  fit_cmd->add_option("-o,--output", fit.output_path, "Write here instead of updating --scene in place");
  fit_cmd->add_option("--seed", fit.ransac.rng_seed, "RANSAC seed");
  fit_cmd->add_option("--iterations", fit.ransac.iterations, "RANSAC hypotheses")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--threshold", fit.ransac.inlier_threshold, "Inlier distance in meters");
  fit_cmd->add_option("--min-inlier-fraction", fit.ransac.min_inlier_fraction, "Minimum consensus fraction");
  fit_cmd->add_option("--stride", fit.stride, "Pixel stride when unprojecting")->check(CLI::PositiveNumber);
  double metric_scale = 0.0;
  auto* metric_scale_opt = fit_cmd->add_option("--metric-scale", metric_scale, "Override the relative-to-metric depth scale");

  // optimize
  cli::OptimizeOptions opt;
  std::vector<fs::path> opt_scenes;
  std::string mode = "full";
  bool no_init = false;
  bool keep_last = false;
  int jobs = 1;
  auto* opt_cmd = app.add_subcommand("optimize", "Jointly refine per-person translation and scale");
  opt_cmd->add_option("scenes", opt_scenes, "Scene JSON files")->required();
  opt_cmd->add_option("-o,--output", opt.output_path, "Output scene (single input only)");
  opt_cmd->add_option("--trace", opt.trace_path, "Loss trace CSV (single input only)");
  opt_cmd->add_option("--lr", opt.config.learning_rate, "ADAM learning rate");
  opt_cmd->add_option("--iters", opt.config.iterations, "ADAM iterations")->check(CLI::PositiveNumber);
  opt_cmd->add_option("--lambda", opt.config.objective.lambda, "Feet-to-ground weight (px per m)");
  opt_cmd->add_option("--mode", mode, "full | reprojection_only | plane_only")
      ->check(CLI::IsMember({"full", "reprojection_only", "plane_only"}));
  opt_cmd->add_flag("--freeze-z", opt.config.freeze_z, "Keep every translation z fixed");
  opt_cmd->add_option("--depths", opt.depths, "Per-person depths for the --freeze-z baseline")->delimiter(',');
  opt_cmd->add_option("--scale-min", opt.config.scale_min, "Lower clamp for every scale");
  opt_cmd->add_option("--early-stop", opt.config.early_stop_rel_tol, "Relative-improvement stop threshold (0 = off)");
  opt_cmd->add_option("--keypoint-scale", opt.config.objective.keypoint_scale, "Divide keypoint residuals by this many pixels");
  opt_cmd->add_option("--seed", opt.seed, "Accepted for uniformity; optimization is deterministic");
  opt_cmd->add_flag("--keep-last", keep_last, "Report the last iterate instead of the lowest-loss one");
  opt_cmd->add_flag("--no-init", no_init, "Keep input scales instead of resetting them to 1");
  opt_cmd->add_option("--jobs", jobs, "Scenes optimized in parallel")->check(CLI::PositiveNumber);

  // evaluate
  cli::EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compute d_ord, d_norm and h_ord");
  eval_cmd->add_option("--est", eval.est_paths, "Estimated scene files")->required();
  eval_cmd->add_option("--gt", eval.gt_paths, "Ground-truth scene files, same order")->required();
  eval_cmd->add_option("--json", eval.json_path, "Write the structured report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every other parse failure is a usage error.
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : static_cast<int>(cli::ExitCode::usage);
  }

  try {
    if (*synth_cmd) {
      if (*synth_seed_opt) synth.seed = synth_seed;
      const auto result = cli::cmd_synth(synth);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      std::printf("wrote %zu frame(s) to %s\n", result.frame_dirs.size(), synth.out_dir.string().c_str());
      return 0;
    }

    if (*fit_cmd) {
      if (*metric_scale_opt) fit.metric_scale = metric_scale;
      const auto r = cli::cmd_fit_plane(fit);
      const Vec3& n = r.anchored.normal;
      const Vec3& p = r.anchored.point;
      std::printf("plane normal (%.6f, %.6f, %.6f), point (%.6f, %.6f, %.6f)\n", n.x(), n.y(), n.z(), p.x(), p.y(), p.z());
      std::printf("inliers %zu / %d, rms %.4g m, reference person %d\n", r.fit.inliers.size(), r.points, r.fit.rms,
                  r.reference_person);
      return 0;
    }

    if (*opt_cmd) {
      opt.config.objective.mode = parse_objective_mode(mode);
      opt.initialize = !no_init;
      opt.config.keep_best = !keep_last;
      if (opt_scenes.size() > 1 && (!opt.output_path.empty() || !opt.trace_path.empty())) {
        std::cerr << "error: --output/--trace need a single input scene\n";
        return static_cast<int>(cli::ExitCode::usage);
      }
      std::vector<cli::OptimizeResult> results(opt_scenes.size());
      std::vector<std::exception_ptr> errors(opt_scenes.size());
      const auto count = static_cast<std::int64_t>(opt_scenes.size());
      #pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
      for (std::int64_t i = 0; i < count; ++i) {
        cli::OptimizeOptions o = opt;
        o.scene_path = opt_scenes[i];
        try {
          results[i] = cli::cmd_optimize(o);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      int code = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (errors[i]) {
          try {
            std::rethrow_exception(errors[i]);
          } catch (const Error& e) {
            std::cerr << opt_scenes[i].string() << ": ";
            code = fail(e);
          }
          continue;
        }
        const auto& r = results[i];
        const auto& first = r.report.loss_trace.front();
        std::printf("%s: total %.6g -> %.6g (reprojection %.6g, plane %.6g) after %d iterations -> %s\n",
                    opt_scenes[i].string().c_str(), first.total, r.report.final_loss.total,
                    r.report.final_loss.reprojection, r.report.final_loss.plane, r.report.converged_iteration,
                    r.output_path.string().c_str());
      }
      return code;
    }

    if (*eval_cmd) {
      const auto r = cli::cmd_evaluate(eval);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::fputs(cli::format_report(r.report).c_str(), stdout);
      if (r.frames_skipped > 0 || r.report.frames_evaluated == 0) {
        return static_cast<int>(cli::ExitCode::evaluation_warning);
      }
      return 0;
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cli::ExitCode::usage);
  }
  return 0;
}
