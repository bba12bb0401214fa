#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sizedepth/planefit.hpp"
#include "sizedepth/scene.hpp"

namespace sizedepth {

struct SynthConfig {
  int n_persons = 3;
  std::pair<double, double> height_range{1.2, 1.95};  // chain height, meters
  std::pair<double, double> depth_range{3.0, 8.0};    // footprint depth, meters
  double plane_tilt_deg = 0.0;     // ground pitch about the camera x axis
  double camera_height = 1.6;      // camera center above the ground, meters
  double keypoint_noise_px = 0.0;  // per-coordinate Gaussian sigma
  /// Overrides keypoint_noise_px per person when non-empty.
  std::vector<double> per_person_noise_px;
  /// Explicit per-person factors; drawn from ambiguity_range when empty.
  std::vector<double> ambiguity_factors;
  std::pair<double, double> ambiguity_range{1.0, 1.0};
  /// The person select_reference_person() will pick keeps factor 1, i.e. a
  /// reference with known depth.
  bool anchor_reference = true;
  double outlier_fraction = 0.0;   // of ground pixels in the depth map
  double min_separation = 0.6;     // between footprints, meters
  double max_ground_depth = 30.0;
  int footprint_margin_px = 12;
  double focal = 1000.0;
  int image_width = 1920;
  int image_height = 1080;
  double metric_scale = 6.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SyntheticScene {
  Scene gt;          // true translations and scales, true plane
  Scene observed;    // perturbed along each person's camera ray, no plane
  DepthObservation depth;
  GroundPlane true_plane;  // normal toward the camera
  std::vector<double> factors;
  int reference_person = 0;
};

/// 24-joint stick figure in SMPL joint order, body frame with y down and the
/// pelvis at the origin. Both ankles sit at the same body height.
Eigen::Matrix3Xd skeleton_template();

/// Throws ErrorCode::placement_failure if a person cannot be placed fully in
/// view in 100 attempts.
SyntheticScene generate_scene(const SynthConfig& cfg);

struct RecoveryError {
  double scale_error = 0.0;  // |s^/s - 1|
  double depth_error = 0.0;  // |z^/z - 1|
  double xy_error = 0.0;     // meters
};

std::vector<RecoveryError> evaluate_recovery(const Scene& gt, const Scene& recovered);

}  // namespace sizedepth
