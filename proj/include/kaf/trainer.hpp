#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kaf/adam.hpp"
#include "kaf/dataset.hpp"
#include "kaf/error.hpp"
#include "kaf/loss.hpp"
#include "kaf/network.hpp"
#include "kaf/rng.hpp"

namespace kaf {

enum class LossKind { MSE, CrossEntropy };
enum class Metric { RMSE, Accuracy };

struct TrainConfig {
  int epochs = 100;
  /// 0 means full batch.
  std::size_t batch_size = 0;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::MSE;
  std::optional<double> clip_tau;
  int eval_every = 1;
};

inline void validate_train_config(const TrainConfig& c) {
  if (c.epochs < 1) throw ParameterError("train config: epochs must be >= 1");
  if (!(c.lr > 0.0)) throw ParameterError("train config: lr must be > 0");
  if (c.eval_every < 1) throw ParameterError("train config: eval_every must be >= 1");
  if (c.clip_tau && !(*c.clip_tau > 0.0)) throw ParameterError("train config: clip_tau must be > 0");
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;
  double mean_abs_a = 0.0;
  double mean_abs_b = 0.0;
  double seconds = 0.0;
};

struct RunReport {
  Metric metric = Metric::RMSE;
  std::vector<EpochRecord> records;
  double best_metric = 0.0;
  int best_epoch = 0;

  double final_metric() const { return records.empty() ? 0.0 : records.back().eval_metric; }
  double final_train_loss() const { return records.empty() ? 0.0 : records.back().train_loss; }

  /// Lower RMSE or higher accuracy is better.
  bool improves(double candidate, double incumbent) const {
    return metric == Metric::RMSE ? candidate < incumbent : candidate > incumbent;
  }

  void add(const EpochRecord& r) {
    if (records.empty() || improves(r.eval_metric, best_metric)) {
      best_metric = r.eval_metric;
      best_epoch = r.epoch;
    }
    records.push_back(r);
  }
};

inline Metric default_metric(TaskKind task) { return task == TaskKind::Regression ? Metric::RMSE : Metric::Accuracy; }

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

/// RMSE is reported in original target units; accuracy is the argmax hit rate.
inline double metric_value(const Matrix& pred, const Dataset& data, Metric metric) {
  if (metric == Metric::RMSE) {
    if (data.task != TaskKind::Regression) throw ParameterError("evaluate: RMSE requires a regression dataset");
    if (pred.rows() != data.y.rows() || pred.cols() != data.y.cols())
      throw ShapeError("evaluate: prediction " + pred.shape() + " vs targets " + data.y.shape());
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred.values()[i] - data.y.values()[i];
      s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size())) * data.target_scale;
  }
  if (data.task != TaskKind::Classification) throw ParameterError("evaluate: accuracy requires a classification dataset");
  std::size_t hits = 0;
  for (std::size_t r = 0; r < pred.rows(); ++r)
    if (static_cast<double>(argmax_row(pred.row(r))) == data.y(r, 0)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

inline double evaluate(const Network& net, const Dataset& data, Metric metric) {
  return metric_value(predict(net, data.x), data, metric);
}

inline LossResult compute_loss(LossKind kind, const Matrix& pred, const Matrix& target) {
  return kind == LossKind::MSE ? mse_loss(pred, target) : cross_entropy_loss(pred, target);
}

/// Minibatch Adam. Batches follow a per-epoch permutation drawn from the seed.
inline RunReport fit(Network& net, const Dataset& train, const Dataset& eval, const TrainConfig& cfg) {
  validate_train_config(cfg);
  validate_dataset(train);
  if (train.size() == 0) throw DataError("fit: empty training set");
  if (train.x.cols() != net.input_dim() || eval.x.cols() != net.input_dim())
    throw DataError("fit: dataset has " + std::to_string(train.x.cols()) + " input columns, model expects " +
                    std::to_string(net.input_dim()));
  if (cfg.loss == LossKind::MSE && train.y.cols() != net.output_dim())
    throw DataError("fit: target width " + std::to_string(train.y.cols()) + " != model output " +
                    std::to_string(net.output_dim()));
  if (cfg.loss == LossKind::CrossEntropy && train.num_classes != net.output_dim())
    throw DataError("fit: " + std::to_string(train.num_classes) + " classes but model output " +
                    std::to_string(net.output_dim()));

  const Metric metric = default_metric(eval.task);
  RunReport report;
  report.metric = metric;
  AdamState adam;
  adam.lr = cfg.lr;
  Rng shuffle = Rng(cfg.seed).fork(0x5348554646ULL);
  const std::size_t n = train.size();
  const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  BackwardOptions opts{cfg.clip_tau};
  const auto t0 = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = permutation(shuffle, n);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      Matrix xb = gather_rows(train.x, order.data() + start, count);
      Matrix yb = gather_rows(train.y, order.data() + start, count);
      NetworkCache cache;
      Matrix pred = forward(net, xb, cache);
      LossResult lr = compute_loss(cfg.loss, pred, yb);
      if (!std::isfinite(lr.loss))
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch), epoch);
      NetworkGradients g = backward(net, cache, lr.grad, opts);
      adam_step(adam, tensors(net), tensors(g.params));
      loss_sum += lr.loss;
      ++batches;
    }
    if (epoch == 1 || epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      const auto scales = scale_summary(net);
      EpochRecord rec;
      rec.epoch = epoch;
      rec.train_loss = loss_sum / static_cast<double>(batches);
      rec.eval_metric = evaluate(net, eval, metric);
      rec.mean_abs_a = scales.mean_abs_a;
      rec.mean_abs_b = scales.mean_abs_b;
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!std::isfinite(rec.eval_metric))
        throw DivergenceError("evaluation diverged at epoch " + std::to_string(epoch), epoch);
      report.add(rec);
    }
  }
  return report;
}

inline RunReport fit(Network& net, const Dataset& train, const TrainConfig& cfg) { return fit(net, train, train, cfg); }

}  // namespace kaf
