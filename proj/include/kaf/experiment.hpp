#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kaf/benchmarks.hpp"
#include "kaf/config.hpp"
#include "kaf/error.hpp"
#include "kaf/loaders.hpp"
#include "kaf/network.hpp"
#include "kaf/poisson.hpp"
#include "kaf/trainer.hpp"

namespace kaf {

/// A resolved training task: datasets for supervised tasks, or a collocation problem.
struct TaskData {
  std::string name;
  std::optional<PdeTask> pde;
  Dataset train;
  Dataset test;
  LossKind loss = LossKind::MSE;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  bool is_sincos() const { return name == "sin" || name == "cos"; }
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& b : kBenchmarks) n.emplace_back(b.name);
    n.insert(n.end(), {"poisson", "mnist", "cifar10"});
    return n;
  }();
  return names;
}

inline TaskData load_task(const RunConfig& cfg, std::uint64_t seed) {
  TaskData t;
  t.name = cfg.get("task");
  if (t.name == "poisson") {
    PdeTask p = sine_poisson_task(cfg.get_count("collocation"), cfg.get_double("fd-step"));
    p.boundary_weight = cfg.get_double("boundary-weight");
    collocation_points(p);
    t.pde = p;
    t.input_dim = t.output_dim = 1;
    return t;
  }
  if (t.name == "mnist" || t.name == "cifar10") {
    const std::size_t n_max = cfg.get_count("n-max");
    if (t.name == "mnist") {
      t.train = load_mnist_idx(cfg.require("mnist-images"), cfg.require("mnist-labels"), n_max);
      t.test = load_mnist_idx(cfg.require("mnist-test-images"), cfg.require("mnist-test-labels"), n_max);
    } else {
      t.train = load_cifar10_bin(split_list(cfg.require("cifar-train")), n_max);
      t.test = load_cifar10_bin(split_list(cfg.require("cifar-test")), n_max);
    }
    t.train.split = Split::Train;
    t.test.split = Split::Test;
    validate_dataset(t.train);
    validate_dataset(t.test);
    t.loss = LossKind::CrossEntropy;
    t.input_dim = t.train.x.cols();
    t.output_dim = 10;
    return t;
  }
  const auto id = benchmark_from_name(t.name);
  if (!id) throw ConfigError("config key 'task': unknown task '" + t.name + "'");
  if (*id == BenchmarkFn::Sin || *id == BenchmarkFn::Cos) {
    t.train = make_sincos_dataset(*id);
    t.test = make_sincos_test_dataset(*id);
  } else {
    auto [train, test] = make_function_dataset(*id, cfg.get_count("n-train"), cfg.get_count("n-test"), seed);
    standardize_targets(train, test);
    t.train = std::move(train);
    t.test = std::move(test);
  }
  t.input_dim = t.train.x.cols();
  t.output_dim = 1;
  return t;
}

inline Activation parse_activation(const std::string& s) {
  if (s == "gelu") return Activation::GELU;
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("config key 'activation': unknown activation '" + s + "'");
}

inline RffInit parse_rff_init(const std::string& s) {
  if (s == "gaussian") return RffInit::Gaussian;
  if (s == "uniform") return RffInit::Uniform;
  throw ConfigError("config key 'rff-init': unknown init '" + s + "'");
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "kaf") return ModelKind::Kaf;
  if (s == "kan") return ModelKind::Kan;
  if (s == "mlp") return ModelKind::Mlp;
  throw ConfigError("config key 'model': unknown model '" + s + "'");
}

inline KafConfig kaf_config_from(const RunConfig& cfg) {
  KafConfig k;
  k.num_grids = cfg.get_count("grids");
  k.sigma_f = cfg.get_double("sigma");
  k.use_layernorm = cfg.get_bool("layernorm");
  k.disable_gelu_path = cfg.get_bool("no-gelu");
  k.disable_rff_path = cfg.get_bool("no-rff");
  k.disable_scales = cfg.get_bool("no-scales");
  k.rff_init = parse_rff_init(cfg.get("rff-init"));
  return k;
}

/// Layer widths: input, the `hidden` list, output.
inline std::vector<std::size_t> network_dims(const RunConfig& cfg, std::size_t d_in, std::size_t d_out) {
  std::vector<std::size_t> dims{d_in};
  for (auto h : cfg.get_counts("hidden")) dims.push_back(h);
  dims.push_back(d_out);
  return dims;
}

inline Network build_model(const RunConfig& cfg, std::size_t d_in, std::size_t d_out, Rng& rng) {
  const auto dims = network_dims(cfg, d_in, d_out);
  switch (parse_model(cfg.get("model"))) {
    case ModelKind::Kaf: return make_kaf_network(dims, kaf_config_from(cfg), rng);
    case ModelKind::Kan: {
      KanConfig k;
      k.grid = cfg.get_count("grid-size");
      k.order = cfg.get_count("spline-order");
      return make_kan_network(dims, k, rng);
    }
    case ModelKind::Mlp: return make_mlp_network(dims, parse_activation(cfg.get("activation")), rng);
  }
  throw ConfigError("config key 'model': unsupported");
}

/// Default minibatch: full batch for collocation problems, else 256.
inline std::size_t default_batch_size(const TaskData& task) {
  if (task.pde) return 0;
  return 256;
}

inline TrainConfig train_config_from(const RunConfig& cfg, const TaskData& task, std::uint64_t seed) {
  TrainConfig tc;
  const auto epochs = cfg.get_int("epochs");
  const auto eval_every = cfg.get_int("eval-every");
  if (epochs < 1) throw ConfigError("config key 'epochs' must be >= 1");
  if (eval_every < 1) throw ConfigError("config key 'eval-every' must be >= 1");
  tc.epochs = static_cast<int>(epochs);
  tc.eval_every = static_cast<int>(eval_every);
  tc.lr = cfg.get_double("lr");
  if (!(tc.lr > 0.0)) throw ConfigError("config key 'lr' must be > 0");
  tc.batch_size = cfg.get_count("batch-size");
  if (tc.batch_size == 0) tc.batch_size = default_batch_size(task);
  tc.seed = seed;
  tc.loss = task.loss;
  const double tau = cfg.get_double("clip-tau");
  if (tau < 0.0) throw ConfigError("config key 'clip-tau' must be >= 0");
  if (tau > 0.0) tc.clip_tau = tau;
  return tc;
}

inline double poisson_exact(double x) { return std::sin(std::numbers::pi * x); }

struct RunResult {
  TaskData task;
  Network net;
  RunReport report;
};

/// Builds the task and model from `cfg` and trains. Initialization draws from
/// its own stream so the data and shuffling streams stay independent of it.
inline RunResult run_experiment(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.seed();
  RunResult r;
  r.task = load_task(cfg, seed);
  Rng init = Rng(seed).fork(3);
  r.net = build_model(cfg, r.task.input_dim, r.task.output_dim, init);
  const TrainConfig tc = train_config_from(cfg, r.task, seed);
  if (r.task.pde)
    r.report = fit_poisson(r.net, *r.task.pde, poisson_exact, tc);
  else
    r.report = fit(r.net, r.task.train, r.task.test, tc);
  return r;
}

/// Width h of a one-hidden-layer MLP [d_in, h, d_out] whose parameter count is closest to `target`.
inline std::size_t matched_mlp_width(std::size_t target, std::size_t d_in, std::size_t d_out,
                                     std::size_t hidden_layers = 1) {
  std::size_t best = 1, best_gap = static_cast<std::size_t>(-1);
  for (std::size_t h = 1; h <= 4096; ++h) {
    std::size_t p = d_in * h + h + h * d_out + d_out;
    for (std::size_t l = 1; l < hidden_layers; ++l) p += h * h + h;
    const std::size_t gap = p > target ? p - target : target - p;
    if (gap < best_gap) {
      best_gap = gap;
      best = h;
    }
  }
  return best;
}

}  // namespace kaf
