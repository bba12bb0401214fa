#include "sizedepth/scene.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sizedepth/error.hpp"
#include "sizedepth/objective.hpp"

namespace sizedepth {

JointConvention JointConvention::smpl24() { return JointConvention{}; }

void GroundPlane::validate() const {
  if (!normal.allFinite() || !point.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "ground plane must be finite");
  }
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_argument, "ground plane normal must be unit length");
  }
}

void Person::validate() const {
  const int k = num_joints();
  if (k < 2) {
    throw Error(ErrorCode::invalid_argument, "a person needs at least two joints");
  }
  const auto in_range = [k](int idx) { return idx >= 0 && idx < k; };
  if (!in_range(convention.ankle_left) || !in_range(convention.ankle_right) ||
      convention.ankle_left == convention.ankle_right) {
    throw Error(ErrorCode::index_out_of_range, "ankle indices must be valid and distinct");
  }
  for (int idx : convention.height_chain) {
    if (!in_range(idx)) {
      throw Error(ErrorCode::index_out_of_range, "height chain index " + std::to_string(idx) + " out of range");
    }
  }
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "scale must be positive");
  }
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(ErrorCode::invalid_argument, "rotation is not orthonormal");
  }
  if (keypoints.cols() != k || confidences.size() != k) {
    throw Error(ErrorCode::schema, "keypoints and confidences must have one entry per joint");
  }
  if (!joints.allFinite() || !keypoints.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::non_finite, "person data must be finite");
  }
  if ((confidences.array() < 0.0).any() || (confidences.array() > 1.0).any()) {
    throw Error(ErrorCode::invalid_argument, "confidences must lie in [0, 1]");
  }
}

void Scene::validate() const {
  if (persons.empty()) {
    throw Error(ErrorCode::invalid_argument, "scene has no persons");
  }
  camera.validate();
  for (const auto& p : persons) p.validate();
  if (plane) plane->validate();
}

Vec3 posed_joint(const Person& person, int k) {
  if (k < 0 || k >= person.num_joints()) {
    throw Error(ErrorCode::index_out_of_range, "joint index " + std::to_string(k) + " out of range");
  }
  return person.scale * (person.rotation * person.joints.col(k)) + person.translation;
}

Eigen::Matrix3Xd posed_joints(const Person& person) {
  Eigen::Matrix3Xd out = person.scale * (person.rotation * person.joints);
  out.colwise() += person.translation;
  return out;
}

int select_reference_person(const Scene& scene) {
  if (scene.persons.empty()) {
    throw Error(ErrorCode::invalid_argument, "scene has no persons");
  }
  const ObjectiveConfig cfg;
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int n = 0; n < scene.num_persons(); ++n) {
    const double err = person_reprojection_loss(scene.persons[n], scene.camera, cfg);
    if (err < best_err) {
      best_err = err;
      best = n;
    }
  }
  return best;
}

double person_height(const Person& person) {
  const auto& chain = person.convention.height_chain;
  if (chain.empty()) {
    throw Error(ErrorCode::invalid_argument, "height chain is empty");
  }
  double h = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    h += (posed_joint(person, chain[i]) - posed_joint(person, chain[i - 1])).norm();
  }
  return h;
}

}  // namespace sizedepth
