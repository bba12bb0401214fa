#include "sizedepth/planefit.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "sizedepth/error.hpp"

namespace sizedepth {

void DepthObservation::validate() const {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::schema, "depth map size must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (depth.size() != n || ground_mask.size() != n) {
    throw Error(ErrorCode::schema, "depth and mask grids must both hold width*height entries");
  }
  if (!(metric_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "metric scale must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (ground_mask[i] != 0 && !(std::isfinite(depth[i]) && depth[i] > 0.0f)) {
      throw Error(ErrorCode::schema, "masked depth at pixel " + std::to_string(i) + " is not finite and positive");
    }
  }
}

void RansacConfig::validate() const {
  if (iterations < 1) throw Error(ErrorCode::invalid_argument, "RANSAC needs at least one iteration");
  if (!(inlier_threshold > 0.0)) throw Error(ErrorCode::invalid_argument, "inlier threshold must be positive");
  if (!(min_inlier_fraction >= 0.0 && min_inlier_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "min inlier fraction must lie in [0, 1]");
  }
}

Eigen::Matrix3Xd unproject_ground(const DepthObservation& obs, const CameraModel& cam, int stride, Exec exec) {
  obs.validate();
  if (stride < 1) throw Error(ErrorCode::invalid_argument, "stride must be at least 1");
  std::vector<std::int64_t> pixels;
  for (int v = 0; v < obs.height; v += stride) {
    for (int u = 0; u < obs.width; u += stride) {
      if (obs.is_ground(u, v)) pixels.push_back(static_cast<std::int64_t>(v) * obs.width + u);
    }
  }
  if (pixels.size() < 3) {
    throw Error(ErrorCode::insufficient_data,
                "need at least 3 ground pixels, found " + std::to_string(pixels.size()));
  }
  return kernels::unproject_pixels(exec, obs.depth, obs.width, pixels, obs.metric_scale, cam);
}

GroundPlane fit_plane_least_squares(const Eigen::Matrix3Xd& points) {
  if (points.cols() < 3) throw Error(ErrorCode::insufficient_data, "plane fit needs at least 3 points");
  const Vec3 centroid = points.rowwise().mean();
  const Eigen::Matrix3Xd centered = points.colwise() - centroid;
  const Mat3 cov = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  GroundPlane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();  // smallest eigenvalue first
  plane.point = centroid;
  return plane;
}

namespace {

PlaneHypothesis hypothesis_from(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 cr = e1.cross(e2);
  const double area2 = cr.norm();
  PlaneHypothesis h;
  // Collinear or repeated points.
  if (!(area2 > 1e-12 * std::max(1.0, e1.squaredNorm() + e2.squaredNorm()))) return h;
  h.normal = cr / area2;
  h.offset = -h.normal.dot(a);
  h.valid = true;
  return h;
}

std::vector<int> inliers_of(const Eigen::Matrix3Xd& points, const GroundPlane& plane, double threshold) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (std::abs(plane.signed_distance(points.col(j))) < threshold) out.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace

PlaneFit ransac_plane(const Eigen::Matrix3Xd& points, const RansacConfig& cfg, Exec exec) {
  cfg.validate();
  const Eigen::Index m = points.cols();
  if (m < 3) throw Error(ErrorCode::insufficient_data, "RANSAC needs at least 3 points");

  // Hypotheses are drawn sequentially so the sample set depends only on the seed.
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  std::vector<PlaneHypothesis> hypotheses(static_cast<std::size_t>(cfg.iterations));
  for (auto& h : hypotheses) {
    const Eigen::Index i = pick(rng);
    Eigen::Index j = pick(rng);
    Eigen::Index k = pick(rng);
    if (i == j || j == k || i == k) continue;
    h = hypothesis_from(points.col(i), points.col(j), points.col(k));
  }

  const std::vector<int> counts = kernels::score_hypotheses(exec, points, hypotheses, cfg.inlier_threshold);
  int best = -1;
  int best_count = 0;
  for (std::size_t h = 0; h < counts.size(); ++h) {
    if (counts[h] > best_count) {
      best_count = counts[h];
      best = static_cast<int>(h);
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::insufficient_data, "no non-degenerate 3-point sample found (collinear input?)");
  }

  GroundPlane consensus{hypotheses[best].normal, -hypotheses[best].offset * hypotheses[best].normal};
  std::vector<int> inliers = inliers_of(points, consensus, cfg.inlier_threshold);

  PlaneFit fit;
  fit.hypotheses_tried = cfg.iterations;
  fit.plane = consensus;
  if (inliers.size() >= 3) {
    Eigen::Matrix3Xd sel(3, static_cast<Eigen::Index>(inliers.size()));
    for (std::size_t i = 0; i < inliers.size(); ++i) sel.col(static_cast<Eigen::Index>(i)) = points.col(inliers[i]);
    const GroundPlane refined = fit_plane_least_squares(sel);
    fit.plane = refined;
    inliers = inliers_of(points, refined, cfg.inlier_threshold);
  }

  const double fraction = static_cast<double>(inliers.size()) / static_cast<double>(m);
  if (fraction < cfg.min_inlier_fraction) {
    throw Error(ErrorCode::low_consensus, "best plane explains " + std::to_string(100.0 * fraction) +
                                              "% of points, below the configured minimum");
  }

  // Camera center on the positive side.
  if (fit.plane.signed_distance(Vec3::Zero()) < 0.0) fit.plane.normal = -fit.plane.normal;

  double ss = 0.0;
  for (int idx : inliers) {
    const double d = fit.plane.signed_distance(points.col(idx));
    ss += d * d;
  }
  fit.rms = inliers.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(inliers.size()));
  fit.inliers = std::move(inliers);
  return fit;
}

GroundPlane anchor_plane(const GroundPlane& plane, const Scene& scene) {
  return anchor_plane(plane, scene, select_reference_person(scene));
}

GroundPlane anchor_plane(const GroundPlane& plane, const Scene& scene, int reference_person) {
  if (reference_person < 0 || reference_person >= scene.num_persons()) {
    throw Error(ErrorCode::index_out_of_range, "reference person index out of range");
  }
  const Person& ref = scene.persons[reference_person];
  const Vec3 left = posed_joint(ref, ref.convention.ankle_left);
  const Vec3 right = posed_joint(ref, ref.convention.ankle_right);
  GroundPlane out = plane;
  out.point = plane.signed_distance(right) < plane.signed_distance(left) ? right : left;
  return out;
}

double mean_masked_depth(const DepthObservation& obs, std::span<const std::uint8_t> person_mask) {
  if (person_mask.size() != obs.depth.size()) {
    throw Error(ErrorCode::mismatch, "person mask must match the depth grid");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < person_mask.size(); ++i) {
    if (person_mask[i] == 0 || !std::isfinite(obs.depth[i])) continue;
    sum += obs.depth[i];
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::insufficient_data, "person mask selects no valid depth");
  return obs.metric_scale * sum / static_cast<double>(count);
}

}  // namespace sizedepth
