#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sizedepth/geometry.hpp"

namespace sizedepth {

/// Which joints play the ankle and height-chain roles.
struct JointConvention {
  std::string name = "smpl24";
  int ankle_left = 7;
  int ankle_right = 8;
  /// Head to foot, summed segment by segment for person_height().
  std::vector<int> height_chain{15, 12, 1, 4, 7};

  /// 24-joint SMPL order: ankles 7/8, chain head(15) -> neck(12) -> left hip(1)
  /// -> left knee(4) -> left ankle(7).
  static JointConvention smpl24();
};

/// Plane through `point` with unit `normal`.
struct GroundPlane {
  Vec3 normal = Vec3::UnitY();
  Vec3 point = Vec3::Zero();

  double signed_distance(const Vec3& x) const { return (x - point).dot(normal); }
  void validate() const;
};

/// One body: frozen joints and rotation from the upstream fit plus the
/// optimized translation and scale.
struct Person {
  Eigen::Matrix3Xd joints;       // body frame, meters
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;
  Eigen::Matrix2Xd keypoints;    // pixels
  Eigen::VectorXd confidences;   // in [0, 1]
  JointConvention convention;

  /// Upstream weak-perspective camera, used by initialize() when no explicit
  /// translation is known.
  std::optional<WeakPerspectiveCam> weak_camera;
  bool has_translation = true;

  int num_joints() const { return static_cast<int>(joints.cols()); }
  void validate() const;
};

struct Scene {
  std::vector<Person> persons;
  CameraModel camera;
  std::optional<GroundPlane> plane;

  int num_persons() const { return static_cast<int>(persons.size()); }
  void validate() const;
};

/// s * R * J_k + t.
Vec3 posed_joint(const Person& person, int k);
Eigen::Matrix3Xd posed_joints(const Person& person);

/// Index of the person with the lowest confidence-weighted reprojection error;
/// ties go to the lowest index.
int select_reference_person(const Scene& scene);

/// Sum of posed segment lengths along the head-to-foot chain.
double person_height(const Person& person);

}  // namespace sizedepth
