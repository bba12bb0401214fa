#include "sizedepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "sizedepth/error.hpp"

namespace sizedepth {

int ordinal_pairs_correct(std::span<const double> est, std::span<const double> gt, double tie_epsilon) {
  if (est.size() != gt.size()) throw Error(ErrorCode::mismatch, "ordinal comparison needs equal lengths");
  int correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = i + 1; j < gt.size(); ++j) {
      const double dg = gt[i] - gt[j];
      const double de = est[i] - est[j];
      if (std::abs(dg) < tie_epsilon) {
        correct += std::abs(de) < tie_epsilon ? 1 : 0;
      } else {
        correct += (dg > 0.0) == (de > 0.0) && std::abs(de) >= tie_epsilon ? 1 : 0;
      }
    }
  }
  return correct;
}

double normalized_pair_sum(std::span<const double> pair_distances) {
  double sum = 0.0;
  double max = 0.0;
  for (double d : pair_distances) {
    sum += d;
    max = std::max(max, d);
  }
  // Everyone at one spot: nothing to normalize.
  return max > 1e-12 ? sum / max : 0.0;
}

std::vector<double> pairwise_distances(const Scene& scene) {
  std::vector<double> out;
  const auto& ps = scene.persons;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      out.push_back((ps[i].translation - ps[j].translation).norm());
    }
  }
  return out;
}

FrameMetrics evaluate_frame(const Scene& est, const Scene& gt) {
  if (est.persons.size() != gt.persons.size()) {
    throw Error(ErrorCode::mismatch, "person count differs: estimate has " + std::to_string(est.persons.size()) +
                                         ", ground truth has " + std::to_string(gt.persons.size()));
  }
  FrameMetrics fm;
  fm.persons = gt.num_persons();
  if (fm.persons < 2) return fm;
  fm.evaluated = true;
  fm.pairs = fm.persons * (fm.persons - 1) / 2;

  std::vector<double> ze, zg, he, hg;
  for (int n = 0; n < fm.persons; ++n) {
    ze.push_back(est.persons[n].translation.z());
    zg.push_back(gt.persons[n].translation.z());
    he.push_back(person_height(est.persons[n]));
    hg.push_back(person_height(gt.persons[n]));
  }
  fm.depth_correct = ordinal_pairs_correct(ze, zg);
  fm.height_correct = ordinal_pairs_correct(he, hg);
  fm.d_norm = std::abs(normalized_pair_sum(pairwise_distances(gt)) -
                       normalized_pair_sum(pairwise_distances(est)));
  return fm;
}

MetricsReport evaluate_metrics(std::span<const Scene> est, std::span<const Scene> gt, Exec exec) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::mismatch, "estimate and ground-truth frame lists differ in length");
  }
  MetricsReport report;
  report.per_frame.resize(gt.size());
  const auto frames = static_cast<std::int64_t>(gt.size());
  if (exec == Exec::serial) {
    for (std::int64_t f = 0; f < frames; ++f) report.per_frame[f] = evaluate_frame(est[f], gt[f]);
  } else {
    std::vector<std::exception_ptr> errors(gt.size());
    #pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t f = 0; f < frames; ++f) {
      try {
        report.per_frame[f] = evaluate_frame(est[f], gt[f]);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  long depth_correct = 0;
  long height_correct = 0;
  double d_norm_sum = 0.0;
  for (const auto& fm : report.per_frame) {
    if (!fm.evaluated) continue;
    ++report.frames_evaluated;
    report.pairs_evaluated += fm.pairs;
    depth_correct += fm.depth_correct;
    height_correct += fm.height_correct;
    d_norm_sum += fm.d_norm;
  }
  if (report.pairs_evaluated > 0) {
    report.d_ord = 100.0 * static_cast<double>(depth_correct) / report.pairs_evaluated;
    report.h_ord = 100.0 * static_cast<double>(height_correct) / report.pairs_evaluated;
    report.d_norm = d_norm_sum / report.frames_evaluated;
  }
  return report;
}

double depth_order_accuracy(std::span<const Scene> est, std::span<const Scene> gt) {
  return evaluate_metrics(est, gt).d_ord;
}

double normalized_distance_error(std::span<const Scene> est, std::span<const Scene> gt) {
  return evaluate_metrics(est, gt).d_norm;
}

double height_order_accuracy(std::span<const Scene> est, std::span<const Scene> gt) {
  return evaluate_metrics(est, gt).h_ord;
}

}  // namespace sizedepth
