#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sizedepth/kernels.hpp"
#include "sizedepth/scene.hpp"

namespace sizedepth {

/// Relative depth grid plus the ground mask from segmentation. Both grids are
/// row-major, width * height entries.
struct DepthObservation {
  int width = 0;
  int height = 0;
  std::vector<float> depth;
  std::vector<std::uint8_t> ground_mask;  // nonzero = ground
  double metric_scale = 6.0;

  float depth_at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool is_ground(int u, int v) const { return ground_mask[static_cast<std::size_t>(v) * width + u] != 0; }
  void validate() const;
};

struct RansacConfig {
  int iterations = 500;
  double inlier_threshold = 0.05;  // meters
  double min_inlier_fraction = 0.3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct PlaneFit {
  GroundPlane plane;  // refined normal, point = inlier centroid
  std::vector<int> inliers;
  double rms = 0.0;   // point-to-plane RMS over inliers
  int hypotheses_tried = 0;
};

/// Ground pixels lifted to camera-frame points with z = depth * metric_scale.
/// `stride` subsamples rows and columns. Throws ErrorCode::insufficient_data
/// with fewer than three ground pixels.
Eigen::Matrix3Xd unproject_ground(const DepthObservation& obs, const CameraModel& cam, int stride = 1,
                                  Exec exec = Exec::parallel);

/// Best-consensus plane over random 3-point hypotheses, refined by least
/// squares on the inliers. The normal is oriented so the camera center has a
/// nonnegative signed distance. Identical output for serial and parallel
/// execution.
PlaneFit ransac_plane(const Eigen::Matrix3Xd& points, const RansacConfig& cfg,
                      Exec exec = Exec::parallel);

/// Total-least-squares plane through `points` (centroid + smallest principal axis).
GroundPlane fit_plane_least_squares(const Eigen::Matrix3Xd& points);

/// Moves the plane onto the reference person's lower ankle, keeping the normal.
GroundPlane anchor_plane(const GroundPlane& plane, const Scene& scene);
GroundPlane anchor_plane(const GroundPlane& plane, const Scene& scene, int reference_person);

/// Metric depth of a person: mean relative depth under `person_mask` times
/// metric_scale.
double mean_masked_depth(const DepthObservation& obs, std::span<const std::uint8_t> person_mask);

}  // namespace sizedepth
