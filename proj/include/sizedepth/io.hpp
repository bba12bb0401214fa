#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

#include "sizedepth/metrics.hpp"
#include "sizedepth/objective.hpp"
#include "sizedepth/planefit.hpp"
#include "sizedepth/scene.hpp"
#include "sizedepth/synth.hpp"

namespace sizedepth::io {

/// Diagnostics recorded by fit-plane next to the plane.
struct PlaneFitInfo {
  int inliers = 0;
  int points = 0;
  double rms = 0.0;
  int reference_person = 0;

  bool operator==(const PlaneFitInfo&) const = default;
};

/// A scene file: the scene plus optional plane-fit diagnostics.
struct SceneDocument {
  Scene scene;
  std::optional<PlaneFitInfo> plane_fit;
};

inline constexpr const char* kSceneFormat = "sizedepth-scene";
inline constexpr const char* kDepthFormat = "sizedepth-depth";
inline constexpr int kFormatVersion = 1;

nlohmann::json to_json(const SceneDocument& doc);
/// Validates structure, dimensions and scene invariants; throws ErrorCode::schema.
SceneDocument scene_from_json(const nlohmann::json& j);

SceneDocument load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneDocument& doc);

/// Sidecar path of a depth payload: "<depth_path>.json".
std::filesystem::path depth_header_path(const std::filesystem::path& depth_path);

/// Raw little-endian float32 row-major grid plus JSON sidecar, and an 8-bit
/// mask grid (nonzero = ground) of the same shape.
void write_depth(const std::filesystem::path& depth_path, const std::filesystem::path& mask_path,
                 const DepthObservation& obs);
DepthObservation read_depth(const std::filesystem::path& depth_path, const std::filesystem::path& mask_path);

/// "iteration,reprojection,plane,total", one row per trace entry plus a final
/// row for the returned scene.
void write_trace_csv(const std::filesystem::path& path, std::span<const LossBreakdown> trace,
                     const LossBreakdown& final_loss);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SynthConfig& cfg);
/// Missing keys keep their defaults.
SynthConfig synth_config_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sizedepth::io
