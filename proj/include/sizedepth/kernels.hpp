#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial loop
// kept as the reference, and an OpenMP version that must produce identical
// results (tests/test_kernels.cpp checks this, bench/ compares timings).

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sizedepth/geometry.hpp"

namespace sizedepth {

enum class Exec { serial, parallel };

/// Plane n.x + offset = 0 proposed from a minimal sample.
struct PlaneHypothesis {
  Vec3 normal = Vec3::UnitY();
  double offset = 0.0;
  bool valid = false;
};

namespace kernels {

namespace serial {

/// Inliers per hypothesis: points with |n.x + offset| < threshold. Invalid
/// hypotheses score -1.
std::vector<int> score_hypotheses(const Eigen::Matrix3Xd& points,
                                  std::span<const PlaneHypothesis> hypotheses, double threshold);

/// Unprojects the listed row-major pixel indices of a depth grid, multiplying
/// every depth by metric_scale.
Eigen::Matrix3Xd unproject_pixels(std::span<const float> depth, int width,
                                  std::span<const std::int64_t> pixels, double metric_scale,
                                  const CameraModel& cam);

}  // namespace serial

namespace omp {

std::vector<int> score_hypotheses(const Eigen::Matrix3Xd& points,
                                  std::span<const PlaneHypothesis> hypotheses, double threshold);

Eigen::Matrix3Xd unproject_pixels(std::span<const float> depth, int width,
                                  std::span<const std::int64_t> pixels, double metric_scale,
                                  const CameraModel& cam);

}  // namespace omp

inline std::vector<int> score_hypotheses(Exec exec, const Eigen::Matrix3Xd& points,
                                         std::span<const PlaneHypothesis> hypotheses, double threshold) {
  return exec == Exec::serial ? serial::score_hypotheses(points, hypotheses, threshold)
                              : omp::score_hypotheses(points, hypotheses, threshold);
}

inline Eigen::Matrix3Xd unproject_pixels(Exec exec, std::span<const float> depth, int width,
                                         std::span<const std::int64_t> pixels, double metric_scale,
                                         const CameraModel& cam) {
  return exec == Exec::serial ? serial::unproject_pixels(depth, width, pixels, metric_scale, cam)
                              : omp::unproject_pixels(depth, width, pixels, metric_scale, cam);
}

}  // namespace kernels
}  // namespace sizedepth
