// Serial reference vs OpenMP for each parallel kernel. Run with
// OMP_NUM_THREADS to vary the thread count.

#include <random>

#include <benchmark/benchmark.h>

#include "sizedepth/kernels.hpp"
#include "sizedepth/metrics.hpp"
#include "sizedepth/optimizer.hpp"
#include "sizedepth/synth.hpp"

using namespace sizedepth;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

const SyntheticScene& ground_scene() {
  static const SyntheticScene s = [] {
    SynthConfig c;
    c.outlier_fraction = 0.3;
    c.plane_tilt_deg = 5.0;
    return generate_scene(c);
  }();
  return s;
}

void BM_ScoreHypotheses(benchmark::State& state) {
  const Eigen::Matrix3Xd pts = unproject_ground(ground_scene().depth, ground_scene().gt.camera, 2);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<PlaneHypothesis> hyps;
  for (int h = 0; h < 64; ++h) hyps.push_back({Vec3(0.1 * g(rng), -1.0, 0.1 * g(rng)).normalized(), 1.6, true});
  for (auto _ : state) benchmark::DoNotOptimize(kernels::score_hypotheses(exec_of(state), pts, hyps, 0.05));
  state.SetItemsProcessed(state.iterations() * pts.cols() * static_cast<std::int64_t>(hyps.size()));
}

void BM_UnprojectPixels(benchmark::State& state) {
  const DepthObservation& d = ground_scene().depth;
  std::vector<std::int64_t> pix;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(d.depth.size()); ++i) {
    if (d.ground_mask[i]) pix.push_back(i);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::unproject_pixels(exec_of(state), d.depth, d.width, pix, d.metric_scale, ground_scene().gt.camera));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pix.size()));
}

std::vector<SyntheticScene> suite(int n) {
  std::vector<SyntheticScene> out;
  for (int i = 0; i < n; ++i) {
    SynthConfig c;
    c.rng_seed = static_cast<std::uint64_t>(i);
    c.n_persons = 2 + i % 4;
    c.ambiguity_range = {0.6, 1.6};
    c.keypoint_noise_px = 1.0;
    out.push_back(generate_scene(c));
  }
  return out;
}

void BM_OptimizeBatch(benchmark::State& state) {
  std::vector<Scene> scenes;
  for (const auto& s : suite(8)) {
    Scene x = s.observed;
    x.plane = s.true_plane;
    scenes.push_back(std::move(x));
  }
  OptimConfig cfg;
  cfg.iterations = 100;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_batch(scenes, cfg, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scenes.size()));
}

void BM_EvaluateMetrics(benchmark::State& state) {
  std::vector<Scene> est, gt;
  for (const auto& s : suite(200)) {
    est.push_back(s.observed);
    gt.push_back(s.gt);
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_metrics(est, gt, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(est.size()));
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_ScoreHypotheses)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UnprojectPixels)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OptimizeBatch)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateMetrics)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
