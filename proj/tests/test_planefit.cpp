#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sizedepth/planefit.hpp"
#include "sizedepth/synth.hpp"
#include "support.hpp"

using namespace sizedepth;
using test::code_of;

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::min(1.0, std::abs(a.normalized().dot(b.normalized())))) * 180.0 / M_PI;
}

DepthObservation constant_depth(int w, int h, float d) {
  DepthObservation obs;
  obs.width = w;
  obs.height = h;
  obs.depth.assign(static_cast<std::size_t>(w) * h, d);
  obs.ground_mask.assign(static_cast<std::size_t>(w) * h, 1);
  return obs;
}

// Plane y = 0 sampled on a 10 m square, with `outliers` uniformly drawn in a
// 10 m box. Inliers come first.
Eigen::Matrix3Xd plane_with_outliers(std::mt19937_64& rng, int inliers, int outliers, double noise = 0.0) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::normal_distribution<double> g(0.0, noise > 0 ? noise : 1.0);
  Eigen::Matrix3Xd pts(3, inliers + outliers);
  for (int i = 0; i < inliers; ++i) pts.col(i) = Vec3(u(rng), noise > 0 ? g(rng) : 0.0, u(rng) + 10.0);
  for (int i = 0; i < outliers; ++i) pts.col(inliers + i) = Vec3(u(rng), u(rng), u(rng) + 10.0);
  return pts;
}

Scene one_person_scene(const Vec3& ankle_l, const Vec3& ankle_r) {
  Scene s;
  s.camera = CameraModel::centered(1000, 640, 480);
  Person p;
  p.joints.resize(3, 3);
  p.joints.col(0) = ankle_l;
  p.joints.col(1) = ankle_r;
  p.joints.col(2) = Vec3(0, -1, 5);
  p.keypoints.resize(2, 3);
  p.confidences = Eigen::VectorXd::Ones(3);
  p.convention.ankle_left = 0;
  p.convention.ankle_right = 1;
  p.convention.height_chain = {2, 0};
  s.persons.push_back(p);
  test::make_exact(s);
  return s;
}

}  // namespace

TEST(UnprojectGround, PrincipalPointPixel) {
  CameraModel cam = CameraModel::centered(1000, 5, 5);
  cam.principal_point = Vec2(2, 2);
  DepthObservation obs = constant_depth(5, 5, 1.0f);
  std::fill(obs.ground_mask.begin(), obs.ground_mask.end(), 0);
  obs.ground_mask[2 * 5 + 2] = 1;
  obs.ground_mask[0] = 1;
  obs.ground_mask[4] = 1;
  const Eigen::Matrix3Xd pts = unproject_ground(obs, cam);
  ASSERT_EQ(pts.cols(), 3);
  // Row-major order: (0,0), (4,0), (2,2).
  EXPECT_EQ(Vec3(pts.col(2)), Vec3(0, 0, 6));
}

TEST(UnprojectGround, HandEvaluatedOffsetPixel) {
  CameraModel cam;
  cam.focal = 1000;
  cam.principal_point = Vec2(10, 5);
  cam.width = 200;
  cam.height = 10;
  const std::vector<std::int64_t> pix{5 * 200 + 110};
  const std::vector<float> depth(2000, 0.5f);
  const Eigen::Matrix3Xd pts = kernels::serial::unproject_pixels(depth, 200, pix, 6.0, cam);
  EXPECT_TRUE(Vec3(pts.col(0)).isApprox(Vec3(0.3, 0, 3), 1e-12));
}

TEST(UnprojectGround, ConstantDepthIsFrontoParallel) {
  const DepthObservation obs = constant_depth(64, 48, 0.7f);
  const CameraModel cam = CameraModel::centered(500, 64, 48);
  const Eigen::Matrix3Xd pts = unproject_ground(obs, cam);
  EXPECT_EQ(pts.cols(), 64 * 48);
  EXPECT_LT(angle_deg(fit_plane_least_squares(pts).normal, Vec3::UnitZ()), 1e-6);
  const PlaneFit fit = ransac_plane(pts, {});
  EXPECT_NEAR(std::abs(fit.plane.normal.z()), 1.0, 1e-12);
  EXPECT_EQ(fit.inliers.size(), static_cast<std::size_t>(pts.cols()));
}

TEST(UnprojectGround, FewerThanThreePixels) {
  DepthObservation obs = constant_depth(8, 8, 1.0f);
  std::fill(obs.ground_mask.begin(), obs.ground_mask.end(), 0);
  obs.ground_mask[3] = obs.ground_mask[9] = 1;
  EXPECT_EQ(code_of([&] { unproject_ground(obs, CameraModel::centered(1000, 8, 8)); }), ErrorCode::insufficient_data);
}

TEST(UnprojectGround, DoublingMetricScaleDoublesPoints) {
  SynthConfig sc;
  sc.rng_seed = 2;
  DepthObservation obs = generate_scene(sc).depth;
  const CameraModel cam = CameraModel::centered(1000, obs.width, obs.height);
  const Eigen::Matrix3Xd a = unproject_ground(obs, cam, 7);
  obs.metric_scale *= 2.0;
  const Eigen::Matrix3Xd b = unproject_ground(obs, cam, 7);
  EXPECT_EQ(b, 2.0 * a);
}

TEST(UnprojectGround, StrideSubsamples) {
  const DepthObservation obs = constant_depth(10, 10, 1.0f);
  EXPECT_EQ(unproject_ground(obs, CameraModel::centered(1000, 10, 10), 3).cols(), 16);
}

TEST(UnprojectGround, ReprojectsToItsPixels) {
  SynthConfig sc;
  sc.rng_seed = 4;
  const SyntheticScene s = generate_scene(sc);
  const CameraModel& cam = s.gt.camera;
  const Eigen::Matrix3Xd pts = unproject_ground(s.depth, cam, 1);
  int i = 0;
  for (int v = 0; v < s.depth.height; ++v) {
    for (int u = 0; u < s.depth.width; ++u) {
      if (!s.depth.is_ground(u, v)) continue;
      if (i % 97 == 0) EXPECT_LT((project(pts.col(i), cam) - Vec2(u, v)).norm(), 1e-9);
      ++i;
    }
  }
  EXPECT_EQ(i, pts.cols());
}

TEST(RansacPlane, NoiselessPlaneAllInliers) {
  std::mt19937_64 rng(1);
  const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 2000, 0);
  for (double thr : {1e-9, 1e-3, 0.05, 1.0}) {
    RansacConfig cfg;
    cfg.inlier_threshold = thr;
    const PlaneFit fit = ransac_plane(pts, cfg);
    EXPECT_NEAR(std::abs(fit.plane.normal.dot(Vec3::UnitY())), 1.0, 1e-12);
    EXPECT_EQ(fit.inliers.size(), 2000u) << "threshold " << thr;
    EXPECT_NEAR(fit.plane.normal.norm(), 1.0, 1e-12);
  }
}

TEST(RansacPlane, ThirtyPercentOutliers) {
  double mean_angle = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 1400, 600, 0.01);
    RansacConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const PlaneFit fit = ransac_plane(pts, cfg);
    mean_angle += angle_deg(fit.plane.normal, Vec3::UnitY()) / 20.0;
    const auto recovered = std::count_if(fit.inliers.begin(), fit.inliers.end(), [](int i) { return i < 1400; });
    EXPECT_GE(recovered, static_cast<long>(0.95 * 1400)) << "seed " << seed;
  }
  EXPECT_LT(mean_angle, 2.0);
}

TEST(RansacPlane, MinimalSample) {
  Eigen::Matrix3Xd pts(3, 3);
  pts << 0, 1, 0, 2, 2, 3, 5, 5, 6;
  const PlaneFit fit = ransac_plane(pts, {});
  const Vec3 n = (pts.col(1) - pts.col(0)).cross(pts.col(2) - pts.col(0)).normalized();
  EXPECT_NEAR(std::abs(fit.plane.normal.dot(n)), 1.0, 1e-12);
  EXPECT_EQ(fit.inliers.size(), 3u);
  EXPECT_LT(fit.rms, 1e-12);
}

TEST(RansacPlane, CollinearInputIsDegenerate) {
  Eigen::Matrix3Xd pts(3, 20);
  for (int i = 0; i < 20; ++i) pts.col(i) = Vec3(i, 2 * i, 3 * i + 1);
  EXPECT_EQ(code_of([&] { ransac_plane(pts, {}); }), ErrorCode::insufficient_data);
}

TEST(RansacPlane, LowConsensus) {
  std::mt19937_64 rng(3);
  const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 0, 500);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.001;
  EXPECT_EQ(code_of([&] { ransac_plane(pts, cfg); }), ErrorCode::low_consensus);
}

TEST(RansacPlane, NormalFacesTheCamera) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3Xd pts = plane_with_outliers(rng, 500, 100, 0.005);
    pts.row(1).array() += 1.5;  // ground 1.5 m below the camera (y down)
    const PlaneFit fit = ransac_plane(pts, {});
    EXPECT_GE(fit.plane.signed_distance(Vec3::Zero()), 0.0);
    EXPECT_LT(fit.plane.normal.y(), 0.0);
  }
}

TEST(RansacPlane, RigidTranslationInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 700, 300, 0.01);
    const Vec3 d(u(rng), u(rng), u(rng));
    const PlaneFit a = ransac_plane(pts, {});
    const PlaneFit b = ransac_plane(pts.colwise() + d, {});
    EXPECT_NEAR(std::abs(a.plane.normal.dot(b.plane.normal)), 1.0, 1e-9);
    EXPECT_EQ(a.inliers, b.inliers);
  }
}

TEST(RansacPlane, DeterministicAndExecutionIndependent) {
  std::mt19937_64 rng(6);
  const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 3000, 1500, 0.02);
  RansacConfig cfg;
  cfg.rng_seed = 77;
  const PlaneFit a = ransac_plane(pts, cfg, Exec::serial);
  const PlaneFit b = ransac_plane(pts, cfg, Exec::parallel);
  const PlaneFit c = ransac_plane(pts, cfg, Exec::parallel);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.plane.normal, b.plane.normal);
  EXPECT_EQ(a.plane.point, b.plane.point);
  EXPECT_EQ(b.plane.normal, c.plane.normal);
  EXPECT_EQ(a.rms, c.rms);
}

TEST(RansacPlane, SynthGroundWithinHalfDegree) {
  SynthConfig sc;
  sc.height_range = {1.7, 1.7};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    sc.rng_seed = seed;
    const SyntheticScene s = generate_scene(sc);
    const PlaneFit fit = ransac_plane(unproject_ground(s.depth, s.gt.camera, 4), {});
    EXPECT_LT(angle_deg(fit.plane.normal, Vec3::UnitY()), 0.5);
    EXPECT_GT(fit.plane.normal.dot(s.true_plane.normal), 0.0);
  }
}

TEST(RansacPlane, RejectsInvalidConfig) {
  std::mt19937_64 rng(7);
  const Eigen::Matrix3Xd pts = plane_with_outliers(rng, 50, 0);
  RansacConfig cfg;
  cfg.iterations = 0;
  EXPECT_THROW(ransac_plane(pts, cfg), Error);
  cfg = {};
  cfg.inlier_threshold = 0.0;
  EXPECT_THROW(ransac_plane(pts, cfg), Error);
}

TEST(AnchorPlane, MovesPointToReferenceAnkle) {
  const Scene s = one_person_scene(Vec3(1, 0, 5), Vec3(1.2, 0.1, 5));
  const GroundPlane anchored = anchor_plane(GroundPlane{Vec3::UnitY(), Vec3::Zero()}, s);
  EXPECT_EQ(anchored.point, Vec3(1, 0, 5));
  EXPECT_EQ(anchored.normal, Vec3::UnitY());
}

TEST(AnchorPlane, UsesTheLowerAnkle) {
  // With n = -y (up), the ankle with the larger y is lower.
  const Scene s = one_person_scene(Vec3(0, 1.0, 5), Vec3(0.2, 1.1, 5));
  const GroundPlane anchored = anchor_plane(GroundPlane{-Vec3::UnitY(), Vec3(0, 2, 0)}, s);
  EXPECT_EQ(anchored.point, Vec3(0.2, 1.1, 5));
}

TEST(AnchorPlane, ReferenceAnkleOnPlaneAfterAnchoring) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.plane_tilt_deg = 6.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    sc.rng_seed = seed;
    const SyntheticScene s = generate_scene(sc);
    const int ref = select_reference_person(s.observed);
    const GroundPlane pl = anchor_plane(s.true_plane, s.observed, ref);
    const Person& p = s.observed.persons[ref];
    const double dl = pl.signed_distance(posed_joint(p, p.convention.ankle_left));
    const double dr = pl.signed_distance(posed_joint(p, p.convention.ankle_right));
    EXPECT_TRUE(dl == 0.0 || dr == 0.0) << dl << " " << dr;
    EXPECT_GE(std::min(dl, dr), -1e-12);
  }
}

TEST(AnchorPlane, OnlyOtherPersonsContribute) {
  SynthConfig sc;
  sc.n_persons = 3;
  sc.ambiguity_factors = {1.0, 1.3, 0.7};
  sc.anchor_reference = false;
  sc.rng_seed = 3;
  const SyntheticScene s = generate_scene(sc);
  Scene obs = s.observed;
  obs.plane = anchor_plane(s.true_plane, obs, 0);
  const LossBreakdown b = total_loss(obs, {});
  EXPECT_LT(b.per_person[0].plane, 1e-12);
  EXPECT_GT(b.per_person[1].plane, 0.0);
  EXPECT_GT(b.per_person[2].plane, 0.0);
}

TEST(AnchorPlane, ReferenceOutOfRange) {
  const Scene s = one_person_scene(Vec3(1, 0, 5), Vec3(1.2, -0.1, 5));
  EXPECT_EQ(code_of([&] { anchor_plane(GroundPlane{}, s, 3); }), ErrorCode::index_out_of_range);
}

TEST(MeanMaskedDepth, AveragesAndScales) {
  DepthObservation obs = constant_depth(4, 1, 1.0f);
  obs.depth = {1.0f, 2.0f, 3.0f, 4.0f};
  const std::vector<std::uint8_t> mask{0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(mean_masked_depth(obs, mask), 2.5 * 6.0);
  const std::vector<std::uint8_t> empty(4, 0);
  EXPECT_EQ(code_of([&] { mean_masked_depth(obs, empty); }), ErrorCode::insufficient_data);
  const std::vector<std::uint8_t> short_mask(3, 1);
  EXPECT_EQ(code_of([&] { mean_masked_depth(obs, short_mask); }), ErrorCode::mismatch);
}

TEST(DepthObservation, ValidatesShapesAndValues) {
  DepthObservation obs = constant_depth(4, 4, 1.0f);
  EXPECT_NO_THROW(obs.validate());
  obs.depth.pop_back();
  EXPECT_EQ(code_of([&] { obs.validate(); }), ErrorCode::schema);
  obs = constant_depth(4, 4, 1.0f);
  obs.depth[5] = -1.0f;
  EXPECT_EQ(code_of([&] { obs.validate(); }), ErrorCode::schema);
  obs.ground_mask[5] = 0;  // invalid depth outside the mask is fine
  EXPECT_NO_THROW(obs.validate());
}
