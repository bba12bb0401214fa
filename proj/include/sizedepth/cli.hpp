#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sizedepth/error.hpp"
#include "sizedepth/io.hpp"
#include "sizedepth/metrics.hpp"
#include "sizedepth/optimizer.hpp"
#include "sizedepth/planefit.hpp"
#include "sizedepth/synth.hpp"

namespace sizedepth::cli {

/// Process exit codes. Stable; documented in README.md.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  schema = 2,             // malformed or unreadable input file
  insufficient_data = 3,  // too few ground pixels / degenerate points
  low_consensus = 4,      // RANSAC inlier fraction below the minimum
  configuration = 5,      // e.g. full mode without a plane
  optimization = 6,       // non-finite loss or gradient
  evaluation_warning = 7, // frames skipped during evaluate
  placement = 8,          // synth could not place a person
};

ExitCode exit_code_for(ErrorCode code);

/// Directory searched for configs when a relative path is not found, and for
/// a default synth.json.
inline constexpr const char* kConfigDirEnv = "SIZEDEPTH_CONFIG_DIR";

struct FitPlaneOptions {
  std::filesystem::path depth_path;
  std::filesystem::path mask_path;
  std::filesystem::path scene_path;
  std::filesystem::path output_path;  // empty: rewrite scene_path
  RansacConfig ransac;
  int stride = 1;
  std::optional<double> metric_scale;  // overrides the depth header
};

struct FitPlaneResult {
  PlaneFit fit;
  GroundPlane anchored;
  int reference_person = 0;
  int points = 0;
};

/// unproject_ground -> ransac_plane -> anchor_plane, then writes the plane
/// and its diagnostics into the scene document.
FitPlaneResult cmd_fit_plane(const FitPlaneOptions& opts);

struct OptimizeOptions {
  std::filesystem::path scene_path;
  std::filesystem::path output_path;  // empty: <stem>.optimized.json next to the input
  std::filesystem::path trace_path;   // empty: <stem>.trace.csv next to the input
  OptimConfig config;
  /// With freeze_z: per-person depths for the depth baseline.
  std::vector<double> depths;
  bool initialize = true;
  /// Accepted for a uniform command surface; optimization draws no random numbers.
  std::uint64_t seed = 0;
};

struct OptimizeResult {
  OptimReport report;
  std::filesystem::path output_path;
  std::filesystem::path trace_path;
};

OptimizeResult cmd_optimize(const OptimizeOptions& opts);

struct EvaluateOptions {
  std::vector<std::filesystem::path> est_paths;
  std::vector<std::filesystem::path> gt_paths;
  std::filesystem::path json_path;  // empty: no structured output file
};

struct EvaluateResult {
  MetricsReport report;
  std::vector<std::string> warnings;
  int frames_skipped = 0;  // person-count mismatches
};

EvaluateResult cmd_evaluate(const EvaluateOptions& opts);

/// Plain-text summary printed by `sizedepth evaluate`.
std::string format_report(const MetricsReport& report);

struct SynthOptions {
  std::filesystem::path config_path;  // empty: $SIZEDEPTH_CONFIG_DIR/synth.json or defaults
  std::filesystem::path out_dir;
  int frames = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct SynthResult {
  SynthConfig config;
  std::vector<std::filesystem::path> frame_dirs;
  std::vector<std::string> warnings;
};

/// Per frame f (seed + f): frame_NNN/{scene.json, gt.json, depth.f32,
/// depth.f32.json, mask.u8}, plus the resolved synth_config.json.
SynthResult cmd_synth(const SynthOptions& opts);

/// Resolves a config path against SIZEDEPTH_CONFIG_DIR.
std::filesystem::path resolve_config_path(const std::filesystem::path& path);

}  // namespace sizedepth::cli
