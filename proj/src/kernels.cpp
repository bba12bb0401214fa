#include "sizedepth/kernels.hpp"

#include <cmath>

namespace sizedepth::kernels {

namespace {

inline int count_inliers(const Eigen::Matrix3Xd& points, const PlaneHypothesis& h, double threshold) {
  const double* p = points.data();
  const Eigen::Index m = points.cols();
  const double nx = h.normal.x(), ny = h.normal.y(), nz = h.normal.z(), off = h.offset;
  int count = 0;
  #pragma omp simd reduction(+ : count)
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d = nx * p[3 * j] + ny * p[3 * j + 1] + nz * p[3 * j + 2] + off;
    count += std::abs(d) < threshold ? 1 : 0;
  }
  return count;
}

inline void unproject_one(std::span<const float> depth, int width, std::int64_t pixel,
                          double metric_scale, const CameraModel& cam, double* out) {
  const double u = static_cast<double>(pixel % width);
  const double v = static_cast<double>(pixel / width);
  const double z = static_cast<double>(depth[pixel]) * metric_scale;
  out[0] = (u - cam.principal_point.x()) * z / cam.focal;
  out[1] = (v - cam.principal_point.y()) * z / cam.focal;
  out[2] = z;
}

}  // namespace

namespace serial {

std::vector<int> score_hypotheses(const Eigen::Matrix3Xd& points,
                                  std::span<const PlaneHypothesis> hypotheses, double threshold) {
  std::vector<int> counts(hypotheses.size(), -1);
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    if (!hypotheses[h].valid) continue;
    counts[h] = count_inliers(points, hypotheses[h], threshold);
  }
  return counts;
}

Eigen::Matrix3Xd unproject_pixels(std::span<const float> depth, int width,
                                  std::span<const std::int64_t> pixels, double metric_scale,
                                  const CameraModel& cam) {
  Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    unproject_one(depth, width, pixels[i], metric_scale, cam, out.col(static_cast<Eigen::Index>(i)).data());
  }
  return out;
}

}  // namespace serial

namespace omp {

std::vector<int> score_hypotheses(const Eigen::Matrix3Xd& points,
                                  std::span<const PlaneHypothesis> hypotheses, double threshold) {
  const auto n = static_cast<std::int64_t>(hypotheses.size());
  std::vector<int> counts(hypotheses.size(), -1);
  #pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t h = 0; h < n; ++h) {
    if (!hypotheses[h].valid) continue;
    counts[h] = count_inliers(points, hypotheses[h], threshold);
  }
  return counts;
}

Eigen::Matrix3Xd unproject_pixels(std::span<const float> depth, int width,
                                  std::span<const std::int64_t> pixels, double metric_scale,
                                  const CameraModel& cam) {
  const auto n = static_cast<std::int64_t>(pixels.size());
  Eigen::Matrix3Xd out(3, n);
  double* dst = out.data();
  #pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    unproject_one(depth, width, pixels[i], metric_scale, cam, dst + 3 * i);
  }
  return out;
}

}  // namespace omp

}  // namespace sizedepth::kernels
