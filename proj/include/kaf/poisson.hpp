#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kaf/adam.hpp"
#include "kaf/error.hpp"
#include "kaf/network.hpp"
#include "kaf/trainer.hpp"

namespace kaf {

/// u''(x) + f(x) = 0 on [0, 1] with Dirichlet values u(0) = g0, u(1) = g1.
struct PdeTask {
  std::function<double(double)> source;
  double g0 = 0.0;
  double g1 = 0.0;
  std::size_t collocation = 100;
  double h = 1e-3;
  double boundary_weight = 100.0;
};

/// f = pi^2 sin(pi x), zero boundaries; the solution is sin(pi x).
inline PdeTask sine_poisson_task(std::size_t collocation = 100, double h = 1e-3) {
  PdeTask t;
  t.source = [](double x) { return std::numbers::pi * std::numbers::pi * std::sin(std::numbers::pi * x); };
  t.collocation = collocation;
  t.h = h;
  return t;
}

/// Evenly spaced interior collocation points j/(N+1), j = 1..N.
inline std::vector<double> collocation_points(const PdeTask& task) {
  if (!(task.h > 0.0)) throw ParameterError("poisson: fd step must be > 0");
  if (task.collocation < 1) throw ParameterError("poisson: need at least one collocation point");
  std::vector<double> xs(task.collocation);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    xs[j] = static_cast<double>(j + 1) / static_cast<double>(task.collocation + 1);
    if (xs[j] - task.h < 0.0 || xs[j] + task.h > 1.0)
      throw ParameterError("poisson: collocation point " + std::to_string(xs[j]) + " lies within h of the boundary");
  }
  return xs;
}

struct PdeLoss {
  double loss = 0.0;
  NetworkGradients grads;
};

/// Generic residual loss for any scalar map u: mean (u''_fd + f)^2 + lambda [(u(0)-g0)^2 + (u(1)-g1)^2].
template <class U>
double poisson_residual_value(U&& u, const PdeTask& task) {
  const auto xs = collocation_points(task);
  double s = 0.0;
  for (double x : xs) {
    const double r = (u(x + task.h) - 2.0 * u(x) + u(x - task.h)) / (task.h * task.h) + task.source(x);
    s += r * r;
  }
  const double b0 = u(0.0) - task.g0, b1 = u(1.0) - task.g1;
  return s / static_cast<double>(xs.size()) + task.boundary_weight * (b0 * b0 + b1 * b1);
}

/// Collocation loss of a 1 -> 1 network and its parameter gradients. The three
/// stencil evaluations and both boundary points go through one batched pass.
inline PdeLoss poisson_residual(const Network& net, const PdeTask& task, const BackwardOptions& opts = {}) {
  if (net.input_dim() != 1 || net.output_dim() != 1) throw ShapeError("poisson_residual: model must map 1 -> 1");
  const auto xs = collocation_points(task);
  const std::size_t n = xs.size();
  Matrix batch(3 * n + 2, 1);
  for (std::size_t j = 0; j < n; ++j) {
    batch(3 * j, 0) = xs[j] - task.h;
    batch(3 * j + 1, 0) = xs[j];
    batch(3 * j + 2, 0) = xs[j] + task.h;
  }
  batch(3 * n, 0) = 0.0;
  batch(3 * n + 1, 0) = 1.0;

  NetworkCache cache;
  const Matrix u = forward(net, batch, cache);
  Matrix du(u.rows(), 1);
  const double inv_h2 = 1.0 / (task.h * task.h);
  double loss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = (u(3 * j, 0) - 2.0 * u(3 * j + 1, 0) + u(3 * j + 2, 0)) * inv_h2 + task.source(xs[j]);
    loss += r * r;
    const double g = 2.0 * r * inv_h2 / static_cast<double>(n);
    du(3 * j, 0) += g;
    du(3 * j + 1, 0) -= 2.0 * g;
    du(3 * j + 2, 0) += g;
  }
  loss /= static_cast<double>(n);
  const double b0 = u(3 * n, 0) - task.g0, b1 = u(3 * n + 1, 0) - task.g1;
  loss += task.boundary_weight * (b0 * b0 + b1 * b1);
  du(3 * n, 0) = 2.0 * task.boundary_weight * b0;
  du(3 * n + 1, 0) = 2.0 * task.boundary_weight * b1;
  return {loss, backward(net, cache, du, opts)};
}

/// RMSE of the network against `exact` on an evenly spaced grid over [0, 1].
inline double solution_rmse(const Network& net, const std::function<double(double)>& exact, std::size_t points = 201) {
  Matrix x(points, 1);
  for (std::size_t i = 0; i < points; ++i) x(i, 0) = static_cast<double>(i) / static_cast<double>(points - 1);
  const Matrix u = predict(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double d = u(i, 0) - exact(x(i, 0));
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(points));
}

/// Full-batch Adam on the collocation loss; the eval metric is the solution RMSE.
inline RunReport fit_poisson(Network& net, const PdeTask& task, const std::function<double(double)>& exact,
                             const TrainConfig& cfg) {
  validate_train_config(cfg);
  RunReport report;
  report.metric = Metric::RMSE;
  AdamState adam;
  adam.lr = cfg.lr;
  const BackwardOptions opts{cfg.clip_tau};
  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    PdeLoss pl = poisson_residual(net, task, opts);
    if (!std::isfinite(pl.loss)) throw DivergenceError("poisson training diverged at epoch " + std::to_string(epoch), epoch);
    adam_step(adam, tensors(net), tensors(pl.grads.params));
    if (epoch == 1 || epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      const auto scales = scale_summary(net);
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = pl.loss;
      rec.eval_metric = solution_rmse(net, exact);
      rec.mean_abs_a = scales.mean_abs_a;
      rec.mean_abs_b = scales.mean_abs_b;
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.add(rec);
    }
  }
  return report;
}

}  // namespace kaf
