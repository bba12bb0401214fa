#pragma once

#include <span>
#include <vector>

#include "sizedepth/kernels.hpp"
#include "sizedepth/scene.hpp"

namespace sizedepth {

/// Ground-truth pairs closer than this (meters) count as ties.
inline constexpr double kTieEpsilon = 1e-6;

struct FrameMetrics {
  int persons = 0;
  int pairs = 0;
  int depth_correct = 0;
  int height_correct = 0;
  double d_norm = 0.0;   // |D/Dmax - D^/D^max| for this frame
  bool evaluated = false;
};

struct MetricsReport {
  double d_ord = 0.0;    // percent
  double d_norm = 0.0;
  double h_ord = 0.0;    // percent
  std::vector<FrameMetrics> per_frame;
  int frames_evaluated = 0;
  int pairs_evaluated = 0;
};

/// Pairwise ordinal agreement of two value lists (same rule for depth and
/// height). gt ties are correct only if the estimate also ties.
int ordinal_pairs_correct(std::span<const double> est, std::span<const double> gt,
                          double tie_epsilon = kTieEpsilon);

/// D / Dmax for one frame given its unordered pairwise distances.
double normalized_pair_sum(std::span<const double> pair_distances);

/// Unordered pairwise translation distances, ordered (0,1), (0,2), ..., (1,2), ...
std::vector<double> pairwise_distances(const Scene& scene);

/// Metrics for one frame; frames with fewer than two persons are flagged as
/// not evaluated. Throws ErrorCode::mismatch on differing person counts.
FrameMetrics evaluate_frame(const Scene& est, const Scene& gt);

/// All metrics at once. Frames are evaluated independently (in parallel for
/// Exec::parallel) and reduced in frame order.
MetricsReport evaluate_metrics(std::span<const Scene> est, std::span<const Scene> gt,
                               Exec exec = Exec::parallel);

double depth_order_accuracy(std::span<const Scene> est, std::span<const Scene> gt);
double normalized_distance_error(std::span<const Scene> est, std::span<const Scene> gt);
double height_order_accuracy(std::span<const Scene> est, std::span<const Scene> gt);

}  // namespace sizedepth
