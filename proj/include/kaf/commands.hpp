#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "kaf/accounting.hpp"
#include "kaf/checkpoint.hpp"
#include "kaf/config.hpp"
#include "kaf/csv.hpp"
#include "kaf/error.hpp"
#include "kaf/experiment.hpp"
#include "kaf/kernel_check.hpp"
#include "kaf/sigma_opt.hpp"
#include "kaf/spectrum_compare.hpp"

namespace kaf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

inline std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  const std::filesystem::path out = cfg.get("out");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  cfg.write_resolved((out / "config.txt").string());
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Trains and writes metrics.csv, model.ckpt and config.txt under `out`.
inline RunResult fit_to_dir(const RunConfig& cfg) {
  const auto out = prepare_out_dir(cfg);
  RunResult r = run_experiment(cfg);
  write_metrics_csv((out / "metrics.csv").string(), r.report);
  save_checkpoint((out / "model.ckpt").string(), r.net);
  return r;
}

inline int cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const RunResult r = fit_to_dir(cfg);
  const char* metric = r.report.metric == Metric::RMSE ? "rmse" : "accuracy";
  log << "task=" << r.task.name << " model=" << cfg.get("model") << " params=" << parameter_count(r.net)
      << " final_" << metric << '=' << format_number(r.report.final_metric()) << " best_" << metric << '='
      << format_number(r.report.best_metric) << " best_epoch=" << r.report.best_epoch << '\n';
  return kExitOk;
}

inline int cmd_params(const RunConfig& cfg, std::ostream& log) {
  const auto out = prepare_out_dir(cfg);
  LayerDims d;
  d.d_in = cfg.get_count("din");
  d.d_out = cfg.get_count("dout");
  d.grid = cfg.get_count("grid-size");
  d.order = cfg.get_count("spline-order");
  d.num_grids = cfg.get_count("grids");
  const ModelKind kind = parse_model(cfg.get("model"));
  const CountReport c = count_params(kind, d);
  const std::vector<std::string> header{"model", "d_in", "d_out", "grid", "order", "num_grids",
                                        "params_formula", "params_actual", "flops_formula"};
  const std::vector<std::string> row{std::string(model_kind_name(kind)), std::to_string(d.d_in),
                                     std::to_string(d.d_out), std::to_string(d.grid),
                                     std::to_string(d.order), std::to_string(d.num_grids),
                                     std::to_string(c.params_formula), std::to_string(c.params_actual),
                                     std::to_string(c.flops_formula)};
  CsvWriter w((out / "params.csv").string());
  w.row(header);
  w.row(row);
  for (std::size_t i = 0; i < header.size(); ++i) log << (i ? "," : "") << header[i];
  log << '\n';
  for (std::size_t i = 0; i < row.size(); ++i) log << (i ? "," : "") << row[i];
  log << '\n';
  return kExitOk;
}

inline int cmd_kernel_check(const RunConfig& cfg, std::ostream& log) {
  const auto out = prepare_out_dir(cfg);
  const auto features = cfg.get_counts("features");
  if (features.empty()) throw ConfigError("config key 'features' is empty");
  const double sigma = cfg.get_double("kernel-sigma");
  const std::size_t dim = cfg.get_count("dim");
  const std::size_t pairs = cfg.get_count("pairs");
  std::size_t seeds = cfg.get_count("seeds");
  if (seeds == 0) seeds = 10;
  const std::uint64_t base = cfg.seed();

  CsvWriter runs((out / "kernel_check.csv").string());
  runs.row({"m", "seed", "sigma", "d", "pairs", "sup_error", "mean_error", "diam", "sigma_p"});
  CsvWriter summary((out / "kernel_check_summary.csv").string());
  summary.row({"m", "median_sup_error", "median_mean_error"});
  for (auto m : features) {
    std::vector<double> sups, means;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto r = kernel_approx_check(m, sigma, dim, pairs, base + s);
      sups.push_back(r.sup_error);
      means.push_back(r.mean_error);
      runs.row({std::to_string(m), std::to_string(base + s), format_number(sigma), std::to_string(dim),
                std::to_string(pairs), format_number(r.sup_error), format_number(r.mean_error),
                format_number(r.diam), format_number(r.sigma_p)});
    }
    summary.row({std::to_string(m), format_number(median(sups)), format_number(median(means))});
    log << "m=" << m << " median_sup_error=" << format_number(median(sups))
        << " median_mean_error=" << format_number(median(means)) << '\n';
  }
  return kExitOk;
}

inline int cmd_sigma_opt(const RunConfig& cfg, std::ostream& log) {
  const auto out = prepare_out_dir(cfg);
  SigmaOptConfig sc;
  sc.n_mc = cfg.get_count("n-mc");
  sc.grid.omega_max = cfg.get_double("omega-max");
  sc.grid.omega_step = cfg.get_double("omega-step");
  sc.half_width = cfg.get_double("half-width");
  sc.taper_width = cfg.get_double("taper");
  sc.seed = cfg.seed();
  const SigmaOptReport r = derive_sigma_opt(sc);
  CsvWriter w((out / "sigma_opt.csv").string());
  w.row({"integral_S", "integral_S2", "alpha_opt", "n_mc", "raw_integral_S", "raw_integral_S2", "scale"});
  w.row({format_number(r.integral_S), format_number(r.integral_S2), format_number(r.alpha_opt),
         std::to_string(r.n_mc), format_number(r.raw_integral_S), format_number(r.raw_integral_S2),
         format_number(r.scale)});
  Spectrum s;
  s.frequencies = r.omega;
  s.magnitudes = r.spectrum;
  s.n = r.omega.size();
  write_spectrum_csv((out / "gelu_spectrum.csv").string(), s);
  log << "integral_S=" << format_number(r.integral_S) << " integral_S2=" << format_number(r.integral_S2)
      << " alpha_opt=" << format_number(r.alpha_opt) << '\n';
  return kExitOk;
}

/// Trains (or loads `checkpoint`) and compares prediction and target spectra on an even grid.
inline int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
  const auto out = prepare_out_dir(cfg);
  RunResult r;
  if (cfg.get("checkpoint").empty()) {
    r = run_experiment(cfg);
    write_metrics_csv((out / "metrics.csv").string(), r.report);
    save_checkpoint((out / "model.ckpt").string(), r.net);
  } else {
    r.task = load_task(cfg, cfg.seed());
    Rng init = Rng(cfg.seed()).fork(3);
    r.net = build_model(cfg, r.task.input_dim, r.task.output_dim, init);
    load_checkpoint(cfg.get("checkpoint"), r.net);
  }
  if (r.task.pde || r.task.input_dim != 1 || r.task.train.task != TaskKind::Regression)
    throw ConfigError("config key 'task': spectrum needs a one-dimensional regression task");
  Dataset grid = r.task.test;
  if (!r.task.is_sincos()) {
    const auto id = *benchmark_from_name(r.task.name);
    const auto& info = benchmark_info(id);
    grid = grid_dataset(id, 1000, info.lo, info.hi, Split::Test);
    for (auto& v : grid.y.values()) v = (v - r.task.train.target_shift) / r.task.train.target_scale;
    grid.target_shift = r.task.train.target_shift;
    grid.target_scale = r.task.train.target_scale;
  }
  const auto cmp = spectrum_compare(r.net, grid);
  write_spectrum_csv((out / "spectrum_model.csv").string(), cmp.model);
  write_spectrum_csv((out / "spectrum_truth.csv").string(), cmp.truth);
  log << "model_peak_bin=" << cmp.model.peak_bin() << " truth_peak_bin=" << cmp.truth.peak_bin()
      << " peak_match=" << (cmp.peak_match ? "true" : "false") << '\n';
  return kExitOk;
}

struct AblationRun {
  std::string group;
  std::string setting;
  std::uint64_t seed = 0;
  RunConfig config;
  double final_metric = 0.0;
  double best_metric = 0.0;
};

inline RunConfig strategy_config(RunConfig cfg, const std::string& strategy) {
  if (strategy == "full") return cfg;
  if (strategy == "no-gelu") cfg.set("no-gelu", "true");
  else if (strategy == "no-scales") cfg.set("no-scales", "true");
  else if (strategy == "no-rff") cfg.set("no-rff", "true");
  else if (strategy == "random-rff-init") cfg.set("rff-init", "uniform");
  else throw ConfigError("config key 'strategies': unknown strategy '" + strategy + "'");
  return cfg;
}

/// Expands the strategy grid, sigma sweep and num_grids sweep over every seed.
inline std::vector<AblationRun> ablation_grid(const RunConfig& cfg) {
  std::size_t seeds = cfg.get_count("seeds");
  if (seeds == 0) seeds = 3;
  const std::uint64_t base = cfg.seed();
  const std::filesystem::path out = cfg.get("out");
  RunConfig model = cfg;
  model.set("model", "kaf");
  std::vector<AblationRun> runs;
  auto add = [&](const std::string& group, const std::string& setting, RunConfig c) {
    for (std::size_t s = 0; s < seeds; ++s) {
      AblationRun r;
      r.group = group;
      r.setting = setting;
      r.seed = base + s;
      r.config = c;
      r.config.pin_seed(r.seed);
      r.config.set("out", (out / "runs" / (group + "-" + setting + "-seed" + std::to_string(r.seed))).string());
      runs.push_back(std::move(r));
    }
  };
  for (const auto& s : cfg.get_strings("strategies")) add("strategy", s, strategy_config(model, s));
  for (const auto& sigma : cfg.get_strings("sigma-sweep")) {
    RunConfig c = model;
    c.set("sigma", sigma);
    c.get_double("sigma");
    add("sigma", sigma, c);
  }
  for (const auto& g : cfg.get_strings("grids-sweep")) {
    RunConfig c = model;
    c.set("grids", g);
    c.get_count("grids");
    add("grids", g, c);
  }
  return runs;
}

/// Runs happen in order unless `parallel` is set; each run owns its output directory.
inline int cmd_ablate(const RunConfig& cfg, std::ostream& log) {
  const auto out = prepare_out_dir(cfg);
  auto runs = ablation_grid(cfg);
  auto execute = [](AblationRun& r) {
    const RunResult res = fit_to_dir(r.config);
    r.final_metric = res.report.final_metric();
    r.best_metric = res.report.best_metric;
  };
  if (cfg.get_bool("parallel")) {
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::exception_ptr> errors(runs.size());
    std::size_t next = 0;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, runs.size()); ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next == runs.size()) return;
            i = next++;
          }
          try {
            execute(runs[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (auto& r : runs) execute(r);
  }

  CsvWriter all((out / "ablation_runs.csv").string());
  all.row({"group", "setting", "seed", "final_metric", "best_metric"});
  for (const auto& r : runs)
    all.row({r.group, r.setting, std::to_string(r.seed), format_number(r.final_metric), format_number(r.best_metric)});

  CsvWriter summary((out / "summary.csv").string());
  const std::vector<std::string> header{"group", "setting", "runs", "median_final_metric", "median_best_metric"};
  summary.row(header);
  std::vector<std::string> files{"strategy", "sigma", "grids"};
  std::vector<std::unique_ptr<CsvWriter>> per_group;
  for (const auto& g : files) {
    per_group.push_back(std::make_unique<CsvWriter>((out / (g + "_summary.csv")).string()));
    per_group.back()->row(header);
  }
  for (std::size_t i = 0; i < runs.size();) {
    std::size_t j = i;
    std::vector<double> finals, bests;
    while (j < runs.size() && runs[j].group == runs[i].group && runs[j].setting == runs[i].setting) {
      finals.push_back(runs[j].final_metric);
      bests.push_back(runs[j].best_metric);
      ++j;
    }
    const std::vector<std::string> row{runs[i].group, runs[i].setting, std::to_string(finals.size()),
                                       format_number(median(finals)), format_number(median(bests))};
    summary.row(row);
    const auto g = std::find(files.begin(), files.end(), runs[i].group) - files.begin();
    per_group[static_cast<std::size_t>(g)]->row(row);
    log << runs[i].group << '=' << runs[i].setting << " median_final=" << row[3] << " median_best=" << row[4] << '\n';
    i = j;
  }
  return kExitOk;
}

/// Maps library exceptions onto process exit codes.
inline int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace kaf
