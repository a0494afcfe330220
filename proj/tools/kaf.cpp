#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "kaf/commands.hpp"

namespace {

bool is_bool_key(std::string_view key) {
  const auto* k = kaf::find_key(key);
  return k && (k->default_value == "true" || k->default_value == "false");
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_file;
  std::function<int(const kaf::RunConfig&, std::ostream&)> run;
};

void register_keys(Subcommand& sub) {
  sub.app->add_option("--config", sub.config_file, "key = value file; flags override it");
  for (const auto& k : kaf::config_keys()) {
    const std::string key(k.key);
    std::string help(k.help);
    if (!k.default_value.empty()) help += " [" + std::string(k.default_value) + "]";
    if (is_bool_key(key))
      sub.app->add_flag("--" + key, sub.flags[key], help);
    else
      sub.app->add_option("--" + key, sub.values[key], help);
  }
}

kaf::RunConfig resolve(const Subcommand& sub) {
  kaf::RunConfig cfg;
  if (!sub.config_file.empty()) cfg.load_file(sub.config_file);
  for (const auto& [key, value] : sub.values)
    if (sub.app->count("--" + key)) cfg.set(key, value);
  for (const auto& [key, value] : sub.flags)
    if (sub.app->count("--" + key)) cfg.set(key, value ? "true" : "false");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kolmogorov-Arnold-Fourier networks: training and analysis"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Subcommand>> subs;
  auto add = [&](const std::string& name, const std::string& help,
                 std::function<int(const kaf::RunConfig&, std::ostream&)> run) {
    auto sub = std::make_unique<Subcommand>();
    sub->app = app.add_subcommand(name, help);
    sub->run = std::move(run);
    register_keys(*sub);
    subs.push_back(std::move(sub));
  };
  add("fit", "train a model on a task", kaf::cmd_fit);
  add("kernel-check", "random Fourier feature kernel approximation error", kaf::cmd_kernel_check);
  add("sigma-opt", "derive the frequency init scale from the GELU spectrum", kaf::cmd_sigma_opt);
  add("params", "parameter and FLOP counts for one layer", kaf::cmd_params);
  add("spectrum", "prediction vs target magnitude spectra", kaf::cmd_spectrum);
  add("ablate", "strategy, sigma and num_grids ablation grid", kaf::cmd_ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kaf::kExitConfig;
  }

  for (const auto& sub : subs) {
    if (!sub->app->parsed()) continue;
    return kaf::run_guarded([&] { return sub->run(resolve(*sub), std::cout); }, std::cerr);
  }
  return kaf::kExitConfig;
}
