#include "sizedepth/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include <Eigen/Core>

#include "sizedepth/error.hpp"

namespace sizedepth {

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
  if (iterations < 1) throw Error(ErrorCode::invalid_argument, "iterations must be at least 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "ADAM betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw Error(ErrorCode::invalid_argument, "ADAM epsilon must be positive");
  if (!(scale_min > 0.0)) throw Error(ErrorCode::invalid_argument, "scale_min must be positive");
  if (!(early_stop_rel_tol >= 0.0)) throw Error(ErrorCode::invalid_argument, "early-stop tolerance must be nonnegative");
  objective.validate();
}

Scene initialize(Scene scene) {
  for (std::size_t n = 0; n < scene.persons.size(); ++n) {
    Person& p = scene.persons[n];
    if (!p.has_translation) {
      if (!p.weak_camera) {
        throw Error(ErrorCode::missing_translation,
                    "person " + std::to_string(n) + " has neither a translation nor a weak-perspective camera");
      }
      p.translation = weak_to_perspective(*p.weak_camera, scene.camera);
      p.has_translation = true;
    }
    p.scale = 1.0;
  }
  return scene;
}

namespace {

// Parameter layout: [t^1 (3) ... t^N (3), s^1 ... s^N].
Eigen::VectorXd pack(const Scene& scene) {
  const Eigen::Index n = scene.num_persons();
  Eigen::VectorXd x(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.segment<3>(3 * i) = scene.persons[i].translation;
    x[3 * n + i] = scene.persons[i].scale;
  }
  return x;
}

void unpack(const Eigen::VectorXd& x, Scene& scene) {
  const Eigen::Index n = scene.num_persons();
  for (Eigen::Index i = 0; i < n; ++i) {
    scene.persons[i].translation = x.segment<3>(3 * i);
    scene.persons[i].scale = x[3 * n + i];
  }
}

Eigen::VectorXd pack_gradient(const std::vector<PersonGradient>& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd out(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.segment<3>(3 * i) = g[i].translation;
    out[3 * n + i] = g[i].scale;
  }
  return out;
}

void require_finite(const ObjectiveEvaluation& ev, int iteration) {
  if (!std::isfinite(ev.loss.total)) {
    throw Error(ErrorCode::non_finite, "non-finite loss at iteration " + std::to_string(iteration));
  }
  for (std::size_t n = 0; n < ev.gradient.size(); ++n) {
    if (!ev.gradient[n].translation.allFinite() || !std::isfinite(ev.gradient[n].scale)) {
      throw Error(ErrorCode::non_finite, "non-finite gradient for person " + std::to_string(n) +
                                             " at iteration " + std::to_string(iteration));
    }
  }
}

}  // namespace

OptimReport optimize(const Scene& scene, const OptimConfig& cfg) {
  cfg.validate();
  scene.validate();

  OptimReport report;
  report.final_scene = scene;
  Scene& work = report.final_scene;
  const Eigen::Index n = work.num_persons();

  Eigen::VectorXd x = pack(work);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(x.size());
  if (cfg.freeze_z) {
    for (Eigen::Index i = 0; i < n; ++i) mask[3 * i + 2] = 0.0;
  }

  report.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  Eigen::VectorXd best_x = x;
  double best_total = INFINITY;
  int best_it = 0;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  int it = 0;
  for (; it < cfg.iterations; ++it) {
    ObjectiveEvaluation ev = evaluate_objective(work, cfg.objective);
    require_finite(ev, it);
    if (ev.loss.total < best_total) {
      best_total = ev.loss.total;
      best_x = x;
      best_it = it;
    }
    if (cfg.early_stop_rel_tol > 0.0 && !report.loss_trace.empty()) {
      const double prev = report.loss_trace.back().total;
      if (prev - ev.loss.total < cfg.early_stop_rel_tol * std::max(prev, 1e-300)) {
        report.loss_trace.push_back(std::move(ev.loss));
        break;
      }
    }
    report.loss_trace.push_back(std::move(ev.loss));

    const Eigen::VectorXd g = pack_gradient(ev.gradient).cwiseProduct(mask);
    beta1_pow *= cfg.adam_beta1;
    beta2_pow *= cfg.adam_beta2;
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
    v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseAbs2();
    const Eigen::VectorXd m_hat = m / (1.0 - beta1_pow);
    const Eigen::VectorXd v_hat = v / (1.0 - beta2_pow);
    x.array() -= cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.adam_eps);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[3 * n + i] = std::max(x[3 * n + i], cfg.scale_min);
    }
    unpack(x, work);
  }
  report.converged_iteration = it;

  ObjectiveEvaluation last = evaluate_objective(work, cfg.objective);
  require_finite(last, it);
  if (!cfg.keep_best || last.loss.total < best_total) {
    report.final_loss = std::move(last.loss);
    report.best_iteration = it;
    return report;
  }
  unpack(best_x, work);
  report.final_loss = report.loss_trace[static_cast<std::size_t>(best_it)];
  report.best_iteration = best_it;
  return report;
}

OptimReport optimize_baseline(const Scene& scene, std::span<const double> per_person_depth,
                              OptimConfig cfg) {
  if (per_person_depth.size() != scene.persons.size()) {
    throw Error(ErrorCode::mismatch, "baseline needs exactly one depth per person");
  }
  Scene fixed = scene;
  for (std::size_t i = 0; i < per_person_depth.size(); ++i) {
    const double z = per_person_depth[i];
    if (!(z > 0.0) || !std::isfinite(z)) {
      throw Error(ErrorCode::invalid_argument, "baseline depth for person " + std::to_string(i) + " must be positive");
    }
    fixed.persons[i].translation.z() = z;
  }
  cfg.freeze_z = true;
  cfg.objective.mode = ObjectiveMode::reprojection_only;
  return optimize(fixed, cfg);
}

std::vector<OptimReport> optimize_batch(std::span<const Scene> scenes, const OptimConfig& cfg, Exec exec) {
  std::vector<OptimReport> reports(scenes.size());
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < scenes.size(); ++i) reports[i] = optimize(scenes[i], cfg);
    return reports;
  }
  std::vector<std::exception_ptr> errors(scenes.size());
  const auto count = static_cast<std::int64_t>(scenes.size());
  #pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      reports[i] = optimize(scenes[i], cfg);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace sizedepth
