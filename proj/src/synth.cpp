#include "sizedepth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "sizedepth/error.hpp"

namespace sizedepth {

void SynthConfig::validate() const {
  if (n_persons < 1) throw Error(ErrorCode::invalid_argument, "n_persons must be at least 1");
  if (!(height_range.first > 0.0 && height_range.first <= height_range.second)) {
    throw Error(ErrorCode::invalid_argument, "height_range must be a nonempty positive interval");
  }
  if (!(depth_range.first > 0.0 && depth_range.first <= depth_range.second)) {
    throw Error(ErrorCode::invalid_argument, "depth_range must be a nonempty positive interval");
  }
  if (!(ambiguity_range.first > 0.0 && ambiguity_range.first <= ambiguity_range.second)) {
    throw Error(ErrorCode::invalid_argument, "ambiguity_range must be a nonempty positive interval");
  }
  if (!ambiguity_factors.empty()) {
    if (static_cast<int>(ambiguity_factors.size()) != n_persons) {
      throw Error(ErrorCode::invalid_argument, "ambiguity_factors needs one entry per person");
    }
    for (double f : ambiguity_factors) {
      if (!(f > 0.0)) throw Error(ErrorCode::invalid_argument, "ambiguity factors must be positive");
    }
  }
  if (!per_person_noise_px.empty() && static_cast<int>(per_person_noise_px.size()) != n_persons) {
    throw Error(ErrorCode::invalid_argument, "per_person_noise_px needs one entry per person");
  }
  if (!(keypoint_noise_px >= 0.0) || !(outlier_fraction >= 0.0 && outlier_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "noise and outlier fraction must be nonnegative (fraction <= 1)");
  }
  if (!(camera_height > 0.0) || !(focal > 0.0) || image_width <= 0 || image_height <= 0) {
    throw Error(ErrorCode::invalid_argument, "camera height, focal and image size must be positive");
  }
  if (std::abs(plane_tilt_deg) >= 60.0) throw Error(ErrorCode::invalid_argument, "plane tilt must be below 60 degrees");
  if (!(metric_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "metric scale must be positive");
}

Eigen::Matrix3Xd skeleton_template() {
  Eigen::Matrix3Xd j(3, 24);
  // clang-format off
  j.col(0)  <<  0.00,  0.00,  0.00;   // pelvis
  j.col(1)  <<  0.09,  0.07,  0.00;   // left hip
  j.col(2)  << -0.09,  0.07,  0.00;   // right hip
  j.col(3)  <<  0.00, -0.11,  0.00;   // spine1
  j.col(4)  <<  0.10,  0.46,  0.01;   // left knee
  j.col(5)  << -0.10,  0.46,  0.01;   // right knee
  j.col(6)  <<  0.00, -0.25,  0.00;   // spine2
  j.col(7)  <<  0.10,  0.86, -0.02;   // left ankle
  j.col(8)  << -0.10,  0.86, -0.02;   // right ankle
  j.col(9)  <<  0.00, -0.31,  0.00;   // spine3
  j.col(10) <<  0.11,  0.86,  0.10;   // left foot
  j.col(11) << -0.11,  0.86,  0.10;   // right foot
  j.col(12) <<  0.00, -0.52,  0.00;   // neck
  j.col(13) <<  0.07, -0.46,  0.00;   // left collar
  j.col(14) << -0.07, -0.46,  0.00;   // right collar
  j.col(15) <<  0.00, -0.70,  0.02;   // head
  j.col(16) <<  0.18, -0.45,  0.00;   // left shoulder
  j.col(17) << -0.18, -0.45,  0.00;   // right shoulder
  j.col(18) <<  0.28, -0.20,  0.00;   // left elbow
  j.col(19) << -0.28, -0.20,  0.00;   // right elbow
  j.col(20) <<  0.32,  0.04,  0.02;   // left wrist
  j.col(21) << -0.32,  0.04,  0.02;   // right wrist
  j.col(22) <<  0.33,  0.12,  0.03;   // left hand
  j.col(23) << -0.33,  0.12,  0.03;   // right hand
  // clang-format on
  return j;
}

namespace {

constexpr int kMaxPlacementAttempts = 100;

double chain_length(const Eigen::Matrix3Xd& joints, const std::vector<int>& chain) {
  double h = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) h += (joints.col(chain[i]) - joints.col(chain[i - 1])).norm();
  return h;
}

bool fully_visible(const Eigen::Matrix3Xd& posed, const CameraModel& cam, double margin) {
  for (Eigen::Index i = 0; i < posed.cols(); ++i) {
    if (posed(2, i) < 0.3) return false;
    const Vec2 px = project(posed.col(i), cam);
    if (px.x() < margin || px.y() < margin || px.x() > cam.width - 1 - margin || px.y() > cam.height - 1 - margin) {
      return false;
    }
  }
  return true;
}

}  // namespace

SyntheticScene generate_scene(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const CameraModel cam = CameraModel::centered(cfg.focal, cfg.image_width, cfg.image_height);
  const double tilt = cfg.plane_tilt_deg * std::numbers::pi / 180.0;
  const Mat3 tilt_rot = Eigen::AngleAxisd(tilt, Vec3::UnitX()).toRotationMatrix();
  const Vec3 down = tilt_rot * Vec3::UnitY();  // gravity direction in the camera frame

  SyntheticScene out;
  out.true_plane.normal = -down;
  out.true_plane.point = cfg.camera_height * down;

  const Eigen::Matrix3Xd templ = skeleton_template();
  const JointConvention conv = JointConvention::smpl24();
  const double templ_height = chain_length(templ, conv.height_chain);
  const Vec3 ankle_mid = 0.5 * (templ.col(conv.ankle_left) + templ.col(conv.ankle_right));

  out.gt.camera = cam;
  out.gt.plane = out.true_plane;
  std::vector<Vec3> footprints;
  for (int n = 0; n < cfg.n_persons; ++n) {
    const double true_height = uniform(cfg.height_range.first, cfg.height_range.second);
    const double size = true_height / templ_height;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double z = uniform(cfg.depth_range.first, cfg.depth_range.second);
      const double u = uniform(0.1 * cfg.image_width, 0.9 * cfg.image_width);
      const double yaw = uniform(-std::numbers::pi, std::numbers::pi);
      Vec3 foot;
      foot.z() = z;
      foot.x() = (u - cam.principal_point.x()) * z / cam.focal;
      foot.y() = (cfg.camera_height - down.x() * foot.x() - down.z() * z) / down.y();

      bool separated = true;
      for (const auto& other : footprints) separated &= (other - foot).norm() >= cfg.min_separation;
      if (!separated) continue;

      Person p;
      p.joints = templ * size;
      p.rotation = tilt_rot * Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
      p.translation = foot - p.rotation * (ankle_mid * size);
      p.convention = conv;
      p.confidences = Eigen::VectorXd::Ones(p.num_joints());
      const Eigen::Matrix3Xd posed = posed_joints(p);
      if (!fully_visible(posed, cam, 5.0)) continue;

      p.keypoints.resize(2, p.num_joints());
      for (int i = 0; i < p.num_joints(); ++i) p.keypoints.col(i) = project(posed.col(i), cam);
      footprints.push_back(foot);
      out.gt.persons.push_back(std::move(p));
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::placement_failure,
                  "could not place person " + std::to_string(n) + " in view after " +
                      std::to_string(kMaxPlacementAttempts) + " attempts (depth range " +
                      std::to_string(cfg.depth_range.first) + "-" + std::to_string(cfg.depth_range.second) +
                      " m, tilt " + std::to_string(cfg.plane_tilt_deg) + " deg)");
    }
  }

  // Keypoint noise is shared by both scenes; the perturbation does not move projections.
  for (int n = 0; n < cfg.n_persons; ++n) {
    const double sigma = cfg.per_person_noise_px.empty() ? cfg.keypoint_noise_px : cfg.per_person_noise_px[n];
    if (sigma <= 0.0) continue;
    std::normal_distribution<double> noise(0.0, sigma);
    Person& p = out.gt.persons[n];
    for (int i = 0; i < p.num_joints(); ++i) {
      p.keypoints(0, i) += noise(rng);
      p.keypoints(1, i) += noise(rng);
    }
  }

  std::vector<double> drawn(static_cast<std::size_t>(cfg.n_persons));
  for (int n = 0; n < cfg.n_persons; ++n) {
    drawn[n] = cfg.ambiguity_factors.empty() ? uniform(cfg.ambiguity_range.first, cfg.ambiguity_range.second)
                                             : cfg.ambiguity_factors[n];
  }

  // Upstream joints come out k times too large and k times too far; the true
  // scale 1/k undoes the size error, and initialization sets the observed
  // scale to k * (1/k) = 1.
  const std::vector<Person> true_size = out.gt.persons;
  const auto apply = [&](const std::vector<double>& factors) {
    Scene obs;
    obs.camera = cam;
    for (int n = 0; n < cfg.n_persons; ++n) {
      const double k = factors[n];
      Person& g = out.gt.persons[n];
      g = true_size[n];
      if (k != 1.0) {
        g.joints = k * true_size[n].joints;
        g.scale = 1.0 / k;
      }
      Person o = g;
      o.translation = k * g.translation;
      o.scale = 1.0;
      obs.persons.push_back(std::move(o));
    }
    return obs;
  };

  std::vector<double> factors = drawn;
  int reference = 0;
  if (cfg.anchor_reference) {
    reference = select_reference_person(out.gt);
    for (int attempt = 0; attempt < 3; ++attempt) {
      factors = drawn;
      factors[reference] = 1.0;
      const int chosen = select_reference_person(apply(factors));
      if (chosen == reference) break;
      reference = chosen;
    }
    factors = drawn;
    factors[reference] = 1.0;
  }
  out.observed = apply(factors);
  out.factors = factors;
  out.reference_person = cfg.anchor_reference ? reference : select_reference_person(out.observed);

  // Depth map of the ground only; persons occlude a dilated box.
  DepthObservation& d = out.depth;
  d.width = cfg.image_width;
  d.height = cfg.image_height;
  d.metric_scale = cfg.metric_scale;
  const auto npix = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height);
  d.depth.assign(npix, 0.0f);
  d.ground_mask.assign(npix, 0);
  std::vector<std::uint8_t> occluded(npix, 0);
  for (const auto& p : out.gt.persons) {
    const Eigen::Matrix3Xd posed = posed_joints(p);
    double u0 = cam.width, v0 = cam.height, u1 = 0.0, v1 = 0.0;
    for (Eigen::Index i = 0; i < posed.cols(); ++i) {
      const Vec2 px = project(posed.col(i), cam);
      u0 = std::min(u0, px.x());
      v0 = std::min(v0, px.y());
      u1 = std::max(u1, px.x());
      v1 = std::max(v1, px.y());
    }
    const int m = cfg.footprint_margin_px;
    const int ub = std::max(0, static_cast<int>(std::floor(u0)) - m);
    const int ue = std::min(cam.width - 1, static_cast<int>(std::ceil(u1)) + m);
    const int vb = std::max(0, static_cast<int>(std::floor(v0)) - m);
    const int ve = std::min(cam.height - 1, static_cast<int>(std::ceil(v1)) + m);
    for (int v = vb; v <= ve; ++v) {
      for (int u = ub; u <= ue; ++u) occluded[static_cast<std::size_t>(v) * d.width + u] = 1;
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      const Vec3 ray((u - cam.principal_point.x()) / cam.focal, (v - cam.principal_point.y()) / cam.focal, 1.0);
      const double denom = down.dot(ray);
      if (denom <= 1e-9) continue;
      double z = cfg.camera_height / denom;
      if (z > cfg.max_ground_depth) continue;
      const std::size_t idx = static_cast<std::size_t>(v) * d.width + u;
      if (cfg.outlier_fraction > 0.0 && unit(rng) < cfg.outlier_fraction) z *= 0.5 + unit(rng);
      d.depth[idx] = static_cast<float>(z / cfg.metric_scale);
      d.ground_mask[idx] = occluded[idx] ? 0 : 1;
    }
  }
  return out;
}

std::vector<RecoveryError> evaluate_recovery(const Scene& gt, const Scene& recovered) {
  if (gt.persons.size() != recovered.persons.size()) {
    throw Error(ErrorCode::mismatch, "recovery evaluation needs matching person counts");
  }
  std::vector<RecoveryError> out(gt.persons.size());
  for (std::size_t n = 0; n < gt.persons.size(); ++n) {
    const Person& g = gt.persons[n];
    const Person& r = recovered.persons[n];
    out[n].scale_error = std::abs(r.scale / g.scale - 1.0);
    out[n].depth_error = std::abs(r.translation.z() / g.translation.z() - 1.0);
    out[n].xy_error = (r.translation.head<2>() - g.translation.head<2>()).norm();
  }
  return out;
}

}  // namespace sizedepth
