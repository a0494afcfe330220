#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kaf/error.hpp"

namespace kaf {

/// Environment variable that overrides the `seed` key.
inline constexpr const char* kSeedEnvVar = "KAF_SEED";

struct KeySpec {
  std::string_view key;
  std::string_view default_value;
  std::string_view help;
};

// clang-format off
inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"model", "kaf", "model family: kaf | kan | mlp"},
      {"activation", "gelu", "mlp hidden activation: gelu | relu | identity"},
      {"hidden", "64", "comma-separated hidden widths"},
      {"grids", "9", "KAF frequencies per input dimension (M)"},
      {"sigma", "1.64", "KAF frequency init std"},
      {"rff-init", "gaussian", "KAF frequency init: gaussian | uniform"},
      {"layernorm", "false", "KAF input layernorm"},
      {"no-gelu", "false", "ablation: drop the GELU path"},
      {"no-rff", "false", "ablation: drop the Fourier path"},
      {"no-scales", "false", "ablation: freeze a = b = 1"},
      {"grid-size", "5", "KAN segments (G)"},
      {"spline-order", "3", "KAN spline degree (K)"},
      {"task", "sin", "bessel | chaotic | simple-product | highfreq-sum | highly-nonlinear | discontinuous | "
                      "oscillating-decay | rational | multiscale | exp-sine | sin | cos | poisson | mnist | cifar10"},
      {"n-train", "3000", "training samples for function tasks"},
      {"n-test", "1000", "test samples for function tasks"},
      {"n-max", "0", "keep at most this many records from dataset files (0 = all)"},
      {"mnist-images", "", "MNIST training images (IDX)"},
      {"mnist-labels", "", "MNIST training labels (IDX)"},
      {"mnist-test-images", "", "MNIST test images (IDX)"},
      {"mnist-test-labels", "", "MNIST test labels (IDX)"},
      {"cifar-train", "", "comma-separated CIFAR-10 training batch files"},
      {"cifar-test", "", "CIFAR-10 test batch file"},
      {"collocation", "100", "Poisson interior collocation points"},
      {"fd-step", "1e-3", "Poisson finite-difference step"},
      {"boundary-weight", "100", "Poisson boundary penalty weight"},
      {"epochs", "1000", "training epochs"},
      {"batch-size", "0", "minibatch size (0 = task default)"},
      {"lr", "1e-3", "Adam learning rate"},
      {"seed", "0", "run seed (overridden by KAF_SEED)"},
      {"clip-tau", "0", "clip the frequency gradient norm to this value (0 = off)"},
      {"eval-every", "1", "evaluate every N epochs"},
      {"out", "out", "output directory"},
      {"checkpoint", "", "spectrum: load this checkpoint instead of training"},
      {"din", "4", "params: layer input width"},
      {"dout", "4", "params: layer output width"},
      {"features", "256,1024,4096", "kernel-check: feature counts m"},
      {"kernel-sigma", "1", "kernel-check: Gaussian kernel bandwidth"},
      {"dim", "4", "kernel-check: input dimension"},
      {"pairs", "200", "kernel-check: random pairs per run"},
      {"seeds", "0", "number of seeds (0 = command default: 10 for kernel-check, 3 for ablate)"},
      {"n-mc", "20000", "sigma-opt: Monte Carlo samples"},
      {"omega-max", "20", "sigma-opt: frequency band half-width"},
      {"omega-step", "0.05", "sigma-opt: tabulation step"},
      {"half-width", "60", "sigma-opt: GELU window half-width L"},
      {"taper", "8", "sigma-opt: Gaussian taper width"},
      {"strategies", "full,no-gelu,no-scales,no-rff,random-rff-init", "ablate: strategies to run"},
      {"sigma-sweep", "0.1,1.64,3", "ablate: sigma values"},
      {"grids-sweep", "2,9,20", "ablate: num_grids values"},
      {"parallel", "false", "ablate: run grid entries on worker threads"},
  };
  return keys;
}
// clang-format on

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Flat key=value run configuration over a fixed key set.
class RunConfig {
public:
  RunConfig() {
    for (const auto& k : config_keys()) values_[std::string(k.key)] = std::string(k.default_value);
  }

  void set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
    explicit_.insert(key);
  }

  /// Fixes the seed, ignoring the environment override from here on.
  void pin_seed(std::uint64_t s) {
    set("seed", std::to_string(s));
    seed_pinned_ = true;
  }

  bool is_set(const std::string& key) const { return explicit_.count(key) > 0; }

  /// Reads `key = value` lines; '#' starts a comment.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const auto t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
      const auto key = trim(std::string_view(t).substr(0, eq));
      if (!find_key(key)) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
      set(key, trim(std::string_view(t).substr(eq + 1)));
    }
  }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  /// Non-empty value or a ConfigError naming the key.
  const std::string& require(const std::string& key) const {
    const auto& v = get(key);
    if (v.empty()) throw ConfigError("missing required config key '" + key + "'");
    return v;
  }

  double get_double(const std::string& key) const { return parse_double(key, get(key)); }

  long long get_int(const std::string& key) const {
    const auto& v = get(key);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
  }

  std::size_t get_count(const std::string& key) const {
    const auto v = get_int(key);
    if (v < 0) throw ConfigError("config key '" + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  }

  bool get_bool(const std::string& key) const {
    const auto& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(key))) out.push_back(parse_double(key, item));
    return out;
  }

  std::vector<std::size_t> get_counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(get(key))) {
      const double v = parse_double(key, item);
      if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError("config key '" + key + "': expected non-negative integers, got '" + item + "'");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key) const { return split_list(get(key)); }

  /// Seed from the environment override when present, else from the `seed` key.
  std::uint64_t seed() const {
    if (const char* env = std::getenv(kSeedEnvVar); env && *env && !seed_pinned_) {
      std::uint64_t s = 0;
      const std::string_view v(env);
      const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
      if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError(std::string(kSeedEnvVar) + ": expected an unsigned integer, got '" + std::string(v) + "'");
      return s;
    }
    const auto v = get_int("seed");
    if (v < 0) throw ConfigError("config key 'seed' must be >= 0");
    return static_cast<std::uint64_t>(v);
  }

  /// Every key in table order, with the effective seed.
  std::string resolved() const {
    std::ostringstream os;
    for (const auto& k : config_keys()) {
      const std::string key(k.key);
      os << key << " = " << (key == "seed" ? std::to_string(seed()) : values_.at(key)) << '\n';
    }
    return os.str();
  }

  void write_resolved(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << resolved();
  }

private:
  static double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
      throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    return out;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
  bool seed_pinned_ = false;
};

}  // namespace kaf
