#pragma once

#include <Eigen/Core>

namespace sizedepth {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Jacobian23 = Eigen::Matrix<double, 2, 3>;

/// Pinhole camera without distortion. Pixel coordinates have u to the right
/// and v downward; the camera frame is x right, y down, z forward.
struct CameraModel {
  double focal = 1000.0;
  Vec2 principal_point = Vec2::Zero();
  int width = 0;
  int height = 0;

  /// Principal point at the image center.
  static CameraModel centered(double focal, int width, int height);

  /// Throws ErrorCode::invalid_camera unless focal, width and height are positive.
  void validate() const;
};

/// Crop-free weak-perspective camera [sigma, tx, ty].
struct WeakPerspectiveCam {
  double sigma = 1.0;
  double tx = 0.0;
  double ty = 0.0;
};

/// Lifts a weak-perspective camera to a perspective translation [tx, ty, f / sigma].
/// tx and ty are taken as camera-frame meters at the lifted depth and pass
/// through unchanged.
Vec3 weak_to_perspective(const WeakPerspectiveCam& wp, const CameraModel& cam);

/// Conversion for cameras regressed on a square person crop, where sigma and
/// (tx, ty) live in the crop's [-1, 1] normalized coordinates:
///   z  = 2 f / (sigma * crop_size)
///   Tx = tx + (crop_center.x - cx) * z / f   (same for y)
Vec3 crop_weak_to_perspective(const WeakPerspectiveCam& wp, const Vec2& crop_center,
                              double crop_size, const CameraModel& cam);

/// Perspective projection. Throws ErrorCode::behind_camera when p.z <= 0.
Vec2 project(const Vec3& p, const CameraModel& cam);

/// d project / d p. Same preconditions as project().
Jacobian23 project_jacobian(const Vec3& p, const CameraModel& cam);

/// Inverse of project() for a known camera-frame depth.
Vec3 unproject(const Vec2& pixel, double depth, const CameraModel& cam);

}  // namespace sizedepth
