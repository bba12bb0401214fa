#pragma once

#include <span>
#include <vector>

#include "sizedepth/kernels.hpp"
#include "sizedepth/objective.hpp"
#include "sizedepth/scene.hpp"

namespace sizedepth {

struct OptimConfig {
  double learning_rate = 1e-2;
  int iterations = 600;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  ObjectiveConfig objective;
  /// Keeps every translation z fixed (depth-baseline mode).
  bool freeze_z = false;
  double scale_min = 0.1;
  /// Stop once one step improves the total by less than this relative amount.
  /// Zero runs the full iteration budget.
  double early_stop_rel_tol = 0.0;
  /// Report the iterate with the lowest total loss instead of the last one.
  /// ADAM on the unsquared residuals ends in a small limit cycle around the
  /// kinks; the best iterate sits at its bottom.
  bool keep_best = true;

  void validate() const;
};

struct OptimReport {
  /// trace[i] is the loss at the iterate before step i.
  std::vector<LossBreakdown> loss_trace;
  /// Loss and parameters of the reported iterate.
  LossBreakdown final_loss;
  Scene final_scene;
  /// Number of ADAM steps taken.
  int converged_iteration = 0;
  /// Steps taken before the reported iterate (converged_iteration unless
  /// keep_best picked an earlier one).
  int best_iteration = 0;
};

/// Sets every scale to one and every translation to its upstream estimate
/// (explicit translation first, lifted weak-perspective camera otherwise).
Scene initialize(Scene scene);

/// ADAM over [t^1 .. t^N, s^1 .. s^N]. Scales are clamped to scale_min after
/// every step. Throws ErrorCode::non_finite if the loss or gradient blows up.
OptimReport optimize(const Scene& scene, const OptimConfig& cfg);

/// Depth baseline: z fixed to the given per-person depths, only (t_x, t_y, s)
/// move, reprojection term only.
OptimReport optimize_baseline(const Scene& scene, std::span<const double> per_person_depth,
                              OptimConfig cfg);

/// Independent optimize() runs over many scenes. The parallel path runs one
/// scene per thread and returns the same reports as the serial one.
std::vector<OptimReport> optimize_batch(std::span<const Scene> scenes, const OptimConfig& cfg,
                                        Exec exec = Exec::parallel);

}  // namespace sizedepth
