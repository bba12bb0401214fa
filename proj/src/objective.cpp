#include "sizedepth/objective.hpp"

#include <cmath>
#include <string>

#include "sizedepth/error.hpp"

namespace sizedepth {

const char* to_string(ObjectiveMode mode) {
  switch (mode) {
    case ObjectiveMode::full: return "full";
    case ObjectiveMode::reprojection_only: return "reprojection_only";
    case ObjectiveMode::plane_only: return "plane_only";
  }
  return "full";
}

ObjectiveMode parse_objective_mode(const std::string& name) {
  if (name == "full") return ObjectiveMode::full;
  if (name == "reprojection_only") return ObjectiveMode::reprojection_only;
  if (name == "plane_only") return ObjectiveMode::plane_only;
  throw Error(ErrorCode::invalid_argument, "unknown objective mode '" + name + "'");
}

void ObjectiveConfig::validate() const {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be nonnegative");
  if (!(z_epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "z_epsilon must be positive");
  if (!(keypoint_scale > 0.0)) throw Error(ErrorCode::invalid_argument, "keypoint_scale must be positive");
  if (!(behind_camera_weight >= 0.0) || !(kink_tolerance >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "penalty weight and kink tolerance must be nonnegative");
  }
}

namespace {

bool needs_plane(ObjectiveMode mode) { return mode != ObjectiveMode::reprojection_only; }

// Accumulates one person's reprojection term and, when `grad` is non-null,
// its gradient scaled by `weight`.
double accumulate_reprojection(const Person& person, const CameraModel& cam,
                               const ObjectiveConfig& cfg, double weight, PersonGradient* grad) {
  double loss = 0.0;
  const double inv_scale = 1.0 / cfg.keypoint_scale;
  for (int i = 0; i < person.num_joints(); ++i) {
    const double c = person.confidences[i];
    if (c == 0.0) continue;
    const Vec3 body = person.rotation * person.joints.col(i);
    Vec3 q = person.scale * body + person.translation;

    bool clamped = false;
    if (q.z() < cfg.z_epsilon) {
      loss += c * cfg.behind_camera_weight * (cfg.z_epsilon - q.z());
      q.z() = cfg.z_epsilon;
      clamped = true;
    }
    const Vec2 r = person.keypoints.col(i) - project(q, cam);
    const double r_norm = r.norm();
    loss += c * r_norm * inv_scale;

    if (grad == nullptr) continue;
    Eigen::RowVector3d dq = Eigen::RowVector3d::Zero();
    if (r_norm > cfg.kink_tolerance) {
      Jacobian23 J = project_jacobian(q, cam);
      if (clamped) J.col(2).setZero();
      dq = -(c * inv_scale / r_norm) * (r.transpose() * J);
    }
    if (clamped) dq.z() -= c * cfg.behind_camera_weight;
    grad->translation += weight * dq.transpose();
    grad->scale += weight * dq.dot(body);
  }
  return loss;
}

double accumulate_plane(const Person& person, const GroundPlane& plane, const ObjectiveConfig& cfg,
                        double weight, PersonGradient* grad) {
  double loss = 0.0;
  for (int idx : {person.convention.ankle_left, person.convention.ankle_right}) {
    const Vec3 body = person.rotation * person.joints.col(idx);
    const Vec3 ankle = person.scale * body + person.translation;
    const double d = plane.signed_distance(ankle);
    loss += std::abs(d);
    if (grad == nullptr || std::abs(d) <= cfg.kink_tolerance) continue;
    const double sgn = d > 0.0 ? weight : -weight;
    grad->translation += sgn * plane.normal;
    grad->scale += sgn * plane.normal.dot(body);
  }
  return loss;
}

ObjectiveEvaluation evaluate_impl(const Scene& scene, const ObjectiveConfig& cfg, bool with_gradient) {
  cfg.validate();
  if (needs_plane(cfg.mode) && !scene.plane) {
    throw Error(ErrorCode::missing_plane, std::string("objective mode '") + to_string(cfg.mode) +
                                              "' requires a ground plane");
  }
  const double rep_weight = cfg.mode == ObjectiveMode::plane_only ? 0.0 : 1.0;
  const double plane_weight = cfg.mode == ObjectiveMode::reprojection_only ? 0.0 : cfg.lambda;

  ObjectiveEvaluation out;
  out.loss.per_person.resize(scene.persons.size());
  if (with_gradient) out.gradient.resize(scene.persons.size());

  for (std::size_t n = 0; n < scene.persons.size(); ++n) {
    const Person& person = scene.persons[n];
    PersonGradient* grad = with_gradient ? &out.gradient[n] : nullptr;
    PersonLoss& pl = out.loss.per_person[n];
    pl.reprojection = accumulate_reprojection(person, scene.camera, cfg, rep_weight,
                                              rep_weight != 0.0 ? grad : nullptr);
    if (scene.plane) {
      pl.plane = accumulate_plane(person, *scene.plane, cfg, plane_weight,
                                  plane_weight != 0.0 ? grad : nullptr);
    }
    out.loss.reprojection += pl.reprojection;
    out.loss.plane += pl.plane;
  }
  out.loss.total = rep_weight * out.loss.reprojection + plane_weight * out.loss.plane;
  return out;
}

}  // namespace

double person_reprojection_loss(const Person& person, const CameraModel& cam, const ObjectiveConfig& cfg) {
  return accumulate_reprojection(person, cam, cfg, 1.0, nullptr);
}

double reprojection_loss(const Scene& scene, const ObjectiveConfig& cfg) {
  double sum = 0.0;
  for (const auto& p : scene.persons) sum += person_reprojection_loss(p, scene.camera, cfg);
  return sum;
}

double plane_loss(const Scene& scene) {
  if (!scene.plane) throw Error(ErrorCode::missing_plane, "plane loss requires a ground plane");
  const ObjectiveConfig cfg;
  double sum = 0.0;
  for (const auto& p : scene.persons) sum += accumulate_plane(p, *scene.plane, cfg, 1.0, nullptr);
  return sum;
}

LossBreakdown total_loss(const Scene& scene, const ObjectiveConfig& cfg) {
  return evaluate_impl(scene, cfg, false).loss;
}

std::vector<PersonGradient> gradients(const Scene& scene, const ObjectiveConfig& cfg) {
  return evaluate_impl(scene, cfg, true).gradient;
}

ObjectiveEvaluation evaluate_objective(const Scene& scene, const ObjectiveConfig& cfg) {
  return evaluate_impl(scene, cfg, true);
}

}  // namespace sizedepth
