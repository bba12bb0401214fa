#pragma once

#include <vector>

#include "sizedepth/scene.hpp"

namespace sizedepth {

enum class ObjectiveMode { full, reprojection_only, plane_only };

const char* to_string(ObjectiveMode mode);
ObjectiveMode parse_objective_mode(const std::string& name);

struct ObjectiveConfig {
  /// Weight of the feet-to-ground term, in pixels per meter. The reprojection
  /// term is in pixels and the plane term in meters; 1000 (about the focal
  /// length) puts a 1 m ankle offset on par with a 1000 px keypoint error.
  double lambda = 1000.0;
  ObjectiveMode mode = ObjectiveMode::full;
  /// Joints closer than this (meters) are projected at z_epsilon and pay
  /// behind_camera_weight per meter of violation, times their confidence.
  double z_epsilon = 1e-3;
  double behind_camera_weight = 1e3;
  /// Reprojection residuals are divided by this many pixels. 1 keeps the
  /// loss in pixels.
  double keypoint_scale = 1.0;
  /// Residual norms and plane distances at or below this are treated as the
  /// kink of |.| and contribute a zero subgradient.
  double kink_tolerance = 1e-9;

  void validate() const;
};

struct PersonLoss {
  double reprojection = 0.0;
  double plane = 0.0;
};

struct LossBreakdown {
  double reprojection = 0.0;
  double plane = 0.0;
  double total = 0.0;
  std::vector<PersonLoss> per_person;
};

struct PersonGradient {
  Vec3 translation = Vec3::Zero();
  double scale = 0.0;
};

struct ObjectiveEvaluation {
  LossBreakdown loss;
  std::vector<PersonGradient> gradient;
};

/// One person's summand of the reprojection loss.
double person_reprojection_loss(const Person& person, const CameraModel& cam,
                                const ObjectiveConfig& cfg = {});

/// sum_n sum_i c_i || x_i - proj(s R J_i + t) ||, unsquared per joint.
double reprojection_loss(const Scene& scene, const ObjectiveConfig& cfg = {});

/// sum_n |(a_l - p).n| + |(a_r - p).n|. Throws ErrorCode::missing_plane
/// without a plane.
double plane_loss(const Scene& scene);

/// Mode-weighted total. The raw plane term is reported when a plane exists,
/// even in reprojection_only mode, and is zero otherwise.
LossBreakdown total_loss(const Scene& scene, const ObjectiveConfig& cfg);

/// Analytic gradient of total_loss().total w.r.t. every (t, s).
std::vector<PersonGradient> gradients(const Scene& scene, const ObjectiveConfig& cfg);

/// Loss and gradient in one pass.
ObjectiveEvaluation evaluate_objective(const Scene& scene, const ObjectiveConfig& cfg);

}  // namespace sizedepth
