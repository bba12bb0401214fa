#include "sizedepth/geometry.hpp"

#include <cmath>
#include <string>

#include "sizedepth/error.hpp"

namespace sizedepth {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_camera: return "invalid_camera";
    case ErrorCode::behind_camera: return "behind_camera";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::missing_plane: return "missing_plane";
    case ErrorCode::missing_translation: return "missing_translation";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::low_consensus: return "low_consensus";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::placement_failure: return "placement_failure";
    case ErrorCode::mismatch: return "mismatch";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

CameraModel CameraModel::centered(double focal, int width, int height) {
  CameraModel cam;
  cam.focal = focal;
  cam.width = width;
  cam.height = height;
  cam.principal_point = Vec2(0.5 * width, 0.5 * height);
  cam.validate();
  return cam;
}

void CameraModel::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) {
    throw Error(ErrorCode::invalid_camera, "focal length must be positive, got " + std::to_string(focal));
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::invalid_camera, "image size must be positive");
  }
  if (!principal_point.allFinite()) {
    throw Error(ErrorCode::invalid_camera, "principal point must be finite");
  }
}

Vec3 weak_to_perspective(const WeakPerspectiveCam& wp, const CameraModel& cam) {
  if (!(wp.sigma > 0.0)) {
    throw Error(ErrorCode::invalid_camera,
                "weak-perspective scale must be positive, got " + std::to_string(wp.sigma));
  }
  return {wp.tx, wp.ty, cam.focal / wp.sigma};
}

Vec3 crop_weak_to_perspective(const WeakPerspectiveCam& wp, const Vec2& crop_center,
                              double crop_size, const CameraModel& cam) {
  if (!(wp.sigma > 0.0) || !(crop_size > 0.0)) {
    throw Error(ErrorCode::invalid_camera, "crop camera needs positive sigma and crop size");
  }
  const double z = 2.0 * cam.focal / (wp.sigma * crop_size);
  const Vec2 offset = (crop_center - cam.principal_point) * (z / cam.focal);
  return {wp.tx + offset.x(), wp.ty + offset.y(), z};
}

Vec2 project(const Vec3& p, const CameraModel& cam) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::behind_camera, "point is behind the camera (z=" + std::to_string(p.z()) + ")");
  }
  const double inv_z = 1.0 / p.z();
  return {cam.focal * p.x() * inv_z + cam.principal_point.x(),
          cam.focal * p.y() * inv_z + cam.principal_point.y()};
}

Jacobian23 project_jacobian(const Vec3& p, const CameraModel& cam) {
  if (!(p.z() > 0.0)) {
    throw Error(ErrorCode::behind_camera, "point is behind the camera (z=" + std::to_string(p.z()) + ")");
  }
  const double inv_z = 1.0 / p.z();
  const double f_z = cam.focal * inv_z;
  Jacobian23 J;
  J << f_z, 0.0, -f_z * p.x() * inv_z,
       0.0, f_z, -f_z * p.y() * inv_z;
  return J;
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraModel& cam) {
  const double k = depth / cam.focal;
  return {(pixel.x() - cam.principal_point.x()) * k, (pixel.y() - cam.principal_point.y()) * k, depth};
}

}  // namespace sizedepth
