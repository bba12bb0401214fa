#include <random>

#include <gtest/gtest.h>

#include "sizedepth/optimizer.hpp"
#include "sizedepth/planefit.hpp"
#include "sizedepth/synth.hpp"
#include "support.hpp"

using namespace sizedepth;
using test::code_of;

namespace {

// Observed scene with the true plane re-anchored at the reference ankle.
Scene with_known_plane(const SyntheticScene& s) {
  Scene obs = s.observed;
  obs.plane = anchor_plane(s.true_plane, obs);
  return obs;
}

SyntheticScene two_person_ambiguity(double factor, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_persons = 2;
  cfg.ambiguity_factors = {1.0, factor};
  cfg.anchor_reference = false;
  cfg.rng_seed = seed;
  return generate_scene(cfg);
}

double max_param_change(const Scene& a, const Scene& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.persons.size(); ++n) {
    m = std::max(m, (a.persons[n].translation - b.persons[n].translation).cwiseAbs().maxCoeff());
    m = std::max(m, std::abs(a.persons[n].scale - b.persons[n].scale));
  }
  return m;
}

}  // namespace

TEST(Initialize, WeakCameraLiftAndUnitScale) {
  std::mt19937_64 rng(1);
  Scene s = test::random_scene(rng, 1, 4);
  s.persons[0].has_translation = false;
  s.persons[0].weak_camera = WeakPerspectiveCam{1.0, 0.0, 0.0};
  const Scene init = initialize(s);
  EXPECT_EQ(init.persons[0].translation, Vec3(0, 0, 1000));
  EXPECT_EQ(init.persons[0].scale, 1.0);
}

TEST(Initialize, ExplicitTranslationPassesThrough) {
  std::mt19937_64 rng(2);
  Scene s = test::random_scene(rng, 1, 4);
  s.persons[0].translation = Vec3(1, 2, 5);
  s.persons[0].weak_camera = WeakPerspectiveCam{3.0, 9.0, 9.0};
  const Scene init = initialize(s);
  EXPECT_EQ(init.persons[0].translation, Vec3(1, 2, 5));
  EXPECT_EQ(init.persons[0].scale, 1.0);
}

TEST(Initialize, AllScalesOne) {
  std::mt19937_64 rng(3);
  for (const auto& p : initialize(test::random_scene(rng, 3, 4)).persons) EXPECT_EQ(p.scale, 1.0);
}

TEST(Initialize, MissingTranslationIsAnError) {
  std::mt19937_64 rng(4);
  Scene s = test::random_scene(rng, 2, 4);
  s.persons[1].has_translation = false;
  EXPECT_EQ(code_of([&] { initialize(s); }), ErrorCode::missing_translation);
}

TEST(Optimize, DefaultsMatchPaperSchedule) {
  const OptimConfig cfg;
  EXPECT_EQ(cfg.learning_rate, 1e-2);
  EXPECT_EQ(cfg.iterations, 600);
  EXPECT_EQ(cfg.adam_beta1, 0.9);
  EXPECT_EQ(cfg.adam_beta2, 0.999);
  EXPECT_EQ(cfg.adam_eps, 1e-8);
  EXPECT_EQ(cfg.scale_min, 0.1);
  EXPECT_EQ(cfg.objective.mode, ObjectiveMode::full);
  EXPECT_FALSE(cfg.freeze_z);
}

TEST(Optimize, FixedPointAtGlobalOptimum) {
  SynthConfig sc;
  sc.rng_seed = 3;
  const SyntheticScene s = generate_scene(sc);
  const OptimReport r = optimize(s.gt, {});
  EXPECT_LE(r.final_loss.total, r.loss_trace.front().total + 1e-9);
  EXPECT_LT(max_param_change(r.final_scene, s.gt), 1e-6);
}

TEST(Optimize, ResolvesReprojectionNeutralPerturbation) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const SyntheticScene s = two_person_ambiguity(1.5, seed);
    ASSERT_EQ(s.reference_person, 0);
    const OptimReport r = optimize(with_known_plane(s), {});
    for (const auto& e : evaluate_recovery(s.gt, r.final_scene)) {
      EXPECT_LT(e.scale_error, 0.02) << "seed " << seed;
      EXPECT_LT(e.depth_error, 0.02) << "seed " << seed;
    }
  }
}

TEST(Optimize, PlaneOnlyBringsFloatingPersonDown) {
  SynthConfig sc;
  sc.n_persons = 1;
  sc.rng_seed = 8;
  const SyntheticScene s = generate_scene(sc);
  Scene floating = s.gt;
  floating.persons[0].translation.y() -= 0.4;  // y is down: 40 cm above ground
  OptimConfig cfg;
  cfg.objective.mode = ObjectiveMode::plane_only;
  const OptimReport r = optimize(floating, cfg);
  const Person& p = r.final_scene.persons[0];
  EXPECT_LT(std::abs(s.true_plane.signed_distance(posed_joint(p, p.convention.ankle_left))), 1e-3);
  EXPECT_LT(std::abs(s.true_plane.signed_distance(posed_joint(p, p.convention.ankle_right))), 1e-3);
}

TEST(Optimize, TraceLengthAndLossDecrease) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.n_persons = 4;
  sc.keypoint_noise_px = 1.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    sc.rng_seed = seed;
    const SyntheticScene s = generate_scene(sc);
    const OptimReport r = optimize(with_known_plane(s), {});
    EXPECT_EQ(r.loss_trace.size(), 600u);
    EXPECT_EQ(r.converged_iteration, 600);
    EXPECT_LE(r.final_loss.total, r.loss_trace.front().total + 1e-9);
  }
}

TEST(Optimize, PreservesReprojectionWhileFixingThePlane) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.n_persons = 3;
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    sc.rng_seed = seed;
    const SyntheticScene s = generate_scene(sc);
    const OptimReport r = optimize(with_known_plane(s), {});
    // Budget of one pixel per weighted joint.
    double joints = 0.0;
    for (const auto& p : s.observed.persons) joints += p.confidences.sum();
    EXPECT_LE(r.final_loss.reprojection, r.loss_trace.front().reprojection + joints) << "seed " << seed;
  }
}

TEST(Optimize, BitwiseDeterministic) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.keypoint_noise_px = 1.0;
  sc.rng_seed = 42;
  const Scene scene = with_known_plane(generate_scene(sc));
  const OptimReport a = optimize(scene, {});
  const OptimReport b = optimize(scene, {});
  ASSERT_EQ(a.loss_trace.size(), b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i) {
    EXPECT_EQ(a.loss_trace[i].total, b.loss_trace[i].total);
    EXPECT_EQ(a.loss_trace[i].reprojection, b.loss_trace[i].reprojection);
    EXPECT_EQ(a.loss_trace[i].plane, b.loss_trace[i].plane);
  }
  EXPECT_EQ(max_param_change(a.final_scene, b.final_scene), 0.0);
}

TEST(Optimize, ScalesNeverDropBelowClamp) {
  SynthConfig sc;
  sc.rng_seed = 5;
  Scene s = with_known_plane(generate_scene(sc));
  for (auto& p : s.persons) p.scale = 0.12;
  OptimConfig cfg;
  cfg.scale_min = 0.11;
  cfg.learning_rate = 0.05;
  cfg.objective.mode = ObjectiveMode::plane_only;
  // Shrinking every body towards its root lifts the ankles off a plane that
  // passes above them, so the plane term pulls the scales down.
  s.plane->point += 2.0 * s.plane->normal;
  for (int iters : {1, 5, 50, 200}) {
    cfg.iterations = iters;
    for (const auto& p : optimize(s, cfg).final_scene.persons) EXPECT_GE(p.scale, cfg.scale_min);
  }
}

TEST(Optimize, EarlyStopShortensTheRun) {
  SynthConfig sc;
  sc.rng_seed = 3;
  const SyntheticScene s = generate_scene(sc);
  OptimConfig cfg;
  cfg.early_stop_rel_tol = 1e-6;
  const OptimReport r = optimize(s.gt, cfg);
  EXPECT_LT(r.converged_iteration, 600);
  EXPECT_EQ(r.loss_trace.size(), static_cast<std::size_t>(r.converged_iteration) + 1);
}

TEST(Optimize, MissingPlaneInFullMode) {
  SynthConfig sc;
  const SyntheticScene s = generate_scene(sc);
  EXPECT_EQ(code_of([&] { optimize(s.observed, {}); }), ErrorCode::missing_plane);
  OptimConfig cfg;
  cfg.objective.mode = ObjectiveMode::reprojection_only;
  EXPECT_NO_THROW(optimize(s.observed, cfg));
}

TEST(Optimize, NonFiniteInputAborts) {
  std::mt19937_64 rng(6);
  Scene s = test::random_scene(rng, 2, 4);
  OptimConfig cfg;
  cfg.iterations = 3;
  cfg.objective.lambda = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { optimize(s, cfg); }), ErrorCode::non_finite);
}

TEST(Optimize, RejectsInvalidConfig) {
  std::mt19937_64 rng(7);
  const Scene s = test::random_scene(rng, 1, 4);
  OptimConfig cfg;
  cfg.learning_rate = 0;
  EXPECT_THROW(optimize(s, cfg), Error);
  cfg = {};
  cfg.iterations = 0;
  EXPECT_THROW(optimize(s, cfg), Error);
  cfg = {};
  cfg.adam_beta2 = 1.0;
  EXPECT_THROW(optimize(s, cfg), Error);
}

TEST(OptimizeBaseline, ExactDepthsRecoverXY) {
  SynthConfig sc;
  sc.rng_seed = 9;
  const SyntheticScene s = generate_scene(sc);
  std::vector<double> depths;
  for (const auto& p : s.gt.persons) depths.push_back(p.translation.z());
  auto xy_error = [&](const Scene& start) {
    const OptimReport r = optimize_baseline(start, depths, {});
    double worst = 0.0;
    for (std::size_t n = 0; n < depths.size(); ++n) {
      EXPECT_EQ(r.final_scene.persons[n].translation.z(), depths[n]);
      worst = std::max(worst, (r.final_scene.persons[n].translation.head<2>() -
                               s.gt.persons[n].translation.head<2>()).norm());
    }
    return worst;
  };
  EXPECT_LT(xy_error(s.gt), 1e-3);
  Scene start = s.gt;
  for (auto& p : start.persons) p.translation.head<2>() += Vec2(0.3, -0.2);
  EXPECT_LT(xy_error(start), 1e-3);
}

TEST(OptimizeBaseline, DoubledDepthsDoubleTheScale) {
  SynthConfig sc;
  sc.rng_seed = 10;
  const SyntheticScene s = generate_scene(sc);
  std::vector<double> depths;
  for (const auto& p : s.gt.persons) depths.push_back(2.0 * p.translation.z());
  OptimConfig cfg;
  cfg.iterations = 1500;
  const OptimReport r = optimize_baseline(s.gt, depths, cfg);
  for (std::size_t n = 0; n < depths.size(); ++n) {
    EXPECT_NEAR(r.final_scene.persons[n].scale / s.gt.persons[n].scale, 2.0, 0.02);
  }
}

TEST(OptimizeBaseline, NoSignalLeavesParametersUnchanged) {
  std::mt19937_64 rng(11);
  Scene s = test::random_scene(rng, 1, 6, false);
  s.persons[0].confidences.setZero();
  const OptimReport r = optimize_baseline(s, std::vector<double>{s.persons[0].translation.z()}, {});
  EXPECT_EQ(max_param_change(r.final_scene, s), 0.0);
}

TEST(OptimizeBaseline, RejectsBadDepths) {
  std::mt19937_64 rng(12);
  const Scene s = test::random_scene(rng, 2, 4, false);
  EXPECT_EQ(code_of([&] { optimize_baseline(s, std::vector<double>{1.0, 0.0}, {}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { optimize_baseline(s, std::vector<double>{1.0, -2.0}, {}); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { optimize_baseline(s, std::vector<double>{1.0}, {}); }), ErrorCode::mismatch);
}

TEST(OptimizeBatch, ParallelMatchesSerial) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.keypoint_noise_px = 1.0;
  std::vector<Scene> scenes;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    sc.rng_seed = seed;
    scenes.push_back(with_known_plane(generate_scene(sc)));
  }
  OptimConfig cfg;
  cfg.iterations = 100;
  const auto a = optimize_batch(scenes, cfg, Exec::serial);
  const auto b = optimize_batch(scenes, cfg, Exec::parallel);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].final_loss.total, b[i].final_loss.total);
    EXPECT_EQ(max_param_change(a[i].final_scene, b[i].final_scene), 0.0);
  }
}

TEST(OptimizeBatch, PropagatesErrors) {
  SynthConfig sc;
  std::vector<Scene> scenes{generate_scene(sc).observed};
  EXPECT_EQ(code_of([&] { optimize_batch(scenes, {}, Exec::parallel); }), ErrorCode::missing_plane);
}

TEST(Optimize, KeepBestReportsTheLowestIterate) {
  SynthConfig sc;
  sc.ambiguity_range = {0.6, 1.6};
  sc.keypoint_noise_px = 1.0;
  sc.rng_seed = 21;
  const Scene scene = with_known_plane(generate_scene(sc));
  OptimConfig cfg;
  const OptimReport best = optimize(scene, cfg);
  cfg.keep_best = false;
  const OptimReport last = optimize(scene, cfg);

  double lowest = INFINITY;
  for (const auto& l : best.loss_trace) lowest = std::min(lowest, l.total);
  EXPECT_LE(best.final_loss.total, lowest);
  EXPECT_LE(best.final_loss.total, last.final_loss.total);
  EXPECT_EQ(last.best_iteration, last.converged_iteration);
  EXPECT_NEAR(total_loss(best.final_scene, cfg.objective).total, best.final_loss.total, 1e-9);
  ASSERT_EQ(best.loss_trace.size(), last.loss_trace.size());
  for (std::size_t i = 0; i < best.loss_trace.size(); ++i) EXPECT_EQ(best.loss_trace[i].total, last.loss_trace[i].total);
}
