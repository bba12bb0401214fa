#pragma once

#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "sizedepth/error.hpp"
#include "sizedepth/objective.hpp"
#include "sizedepth/scene.hpp"

namespace sizedepth::test {

template <class F>
ErrorCode code_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::invalid_argument;
}

inline Mat3 rot_z(double deg) {
  return Eigen::AngleAxisd(deg * M_PI / 180.0, Vec3::UnitZ()).toRotationMatrix();
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

// K joints in a body-sized box; ankles 0 and 1, chain 0..K-1.
inline Person random_person(std::mt19937_64& rng, int K, const CameraModel& cam) {
  std::uniform_real_distribution<double> u(-0.4, 0.4), zt(4.0, 10.0), sc(0.7, 1.3), off(-20.0, 20.0),
      conf(0.2, 1.0), xy(-1.5, 1.5);
  Person p;
  p.joints.resize(3, K);
  for (int k = 0; k < K; ++k) p.joints.col(k) = Vec3(u(rng), 2.0 * u(rng), u(rng));
  p.rotation = random_rotation(rng);
  p.translation = Vec3(xy(rng), xy(rng) * 0.5, zt(rng));
  p.scale = sc(rng);
  p.convention.name = "test";
  p.convention.ankle_left = 0;
  p.convention.ankle_right = 1;
  p.convention.height_chain.clear();
  for (int k = 0; k < K; ++k) p.convention.height_chain.push_back(k);
  p.keypoints.resize(2, K);
  p.confidences.resize(K);
  for (int k = 0; k < K; ++k) {
    const Vec3 x = p.scale * p.rotation * p.joints.col(k) + p.translation;
    p.keypoints.col(k) = Vec2(cam.focal * x.x() / x.z() + cam.principal_point.x() + off(rng),
                              cam.focal * x.y() / x.z() + cam.principal_point.y() + off(rng));
    p.confidences(k) = conf(rng);
  }
  return p;
}

inline Scene random_scene(std::mt19937_64& rng, int N, int K, bool with_plane = true) {
  Scene s;
  s.camera = CameraModel::centered(1000.0, 1920, 1080);
  for (int n = 0; n < N; ++n) s.persons.push_back(random_person(rng, K, s.camera));
  if (with_plane) {
    std::normal_distribution<double> g(0.0, 0.2);
    GroundPlane pl;
    pl.normal = Vec3(g(rng), -1.0, g(rng)).normalized();
    pl.point = Vec3(0.0, 1.5, 6.0);
    s.plane = pl;
  }
  return s;
}

// Keypoints replaced by the exact projection of the posed joints.
inline void make_exact(Scene& s) {
  for (auto& p : s.persons) {
    for (int k = 0; k < p.num_joints(); ++k) {
      const Vec3 x = posed_joint(p, k);
      p.keypoints.col(k) = Vec2(s.camera.focal * x.x() / x.z() + s.camera.principal_point.x(),
                                s.camera.focal * x.y() / x.z() + s.camera.principal_point.y());
    }
  }
}

// Flat [t1..tN, s1..sN] accessors used by finite-difference checks.
inline double& param(Scene& s, int i) {
  const int N = s.num_persons();
  if (i < 3 * N) return s.persons[i / 3].translation(i % 3);
  return s.persons[i - 3 * N].scale;
}

inline Eigen::VectorXd flat_gradient(const std::vector<PersonGradient>& g) {
  const int N = static_cast<int>(g.size());
  Eigen::VectorXd v(4 * N);
  for (int n = 0; n < N; ++n) {
    v.segment<3>(3 * n) = g[n].translation;
    v(3 * N + n) = g[n].scale;
  }
  return v;
}

inline Eigen::VectorXd fd_gradient(const Scene& scene, const ObjectiveConfig& cfg, double rel_h) {
  const int P = 4 * scene.num_persons();
  Eigen::VectorXd g(P);
  for (int i = 0; i < P; ++i) {
    Scene plus = scene, minus = scene;
    const double h = rel_h * std::max(1.0, std::abs(param(plus, i)));
    param(plus, i) += h;
    param(minus, i) -= h;
    g(i) = (total_loss(plus, cfg).total - total_loss(minus, cfg).total) / (2.0 * h);
  }
  return g;
}

// Smallest reprojection residual norm and smallest |ankle-plane distance|,
// used to exclude samples that sit near a kink of the objective.
inline double min_kink_distance(const Scene& s) {
  double m = INFINITY;
  for (const auto& p : s.persons) {
    for (int k = 0; k < p.num_joints(); ++k) {
      const Vec3 x = posed_joint(p, k);
      const Vec2 px(s.camera.focal * x.x() / x.z() + s.camera.principal_point.x(),
                    s.camera.focal * x.y() / x.z() + s.camera.principal_point.y());
      if (p.confidences(k) > 0) m = std::min(m, (px - p.keypoints.col(k)).norm());
    }
    if (s.plane) {
      m = std::min(m, std::abs(s.plane->signed_distance(posed_joint(p, p.convention.ankle_left))));
      m = std::min(m, std::abs(s.plane->signed_distance(posed_joint(p, p.convention.ankle_right))));
    }
  }
  return m;
}

}  // namespace sizedepth::test
