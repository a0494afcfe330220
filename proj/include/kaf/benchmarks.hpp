#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "kaf/dataset.hpp"
#include "kaf/error.hpp"
#include "kaf/rng.hpp"
#include "kaf/special.hpp"

namespace kaf {

enum class BenchmarkFn {
  Bessel,
  Chaotic,
  SimpleProduct,
  HighFreqSum,
  HighlyNonlinear,
  Discontinuous,
  OscillatingDecay,
  Rational,
  MultiScale,
  ExpSine,
  Sin,
  Cos,
};

/// The ten tabulated approximation targets (Sin/Cos excluded).
inline constexpr std::array<BenchmarkFn, 10> kTableFunctions = {
    BenchmarkFn::Bessel,          BenchmarkFn::Chaotic,       BenchmarkFn::SimpleProduct, BenchmarkFn::HighFreqSum,
    BenchmarkFn::HighlyNonlinear, BenchmarkFn::Discontinuous, BenchmarkFn::OscillatingDecay,
    BenchmarkFn::Rational,        BenchmarkFn::MultiScale,    BenchmarkFn::ExpSine};

struct BenchmarkInfo {
  BenchmarkFn id;
  std::string_view name;
  std::size_t input_dim;
  double lo;
  double hi;
};

inline constexpr std::array<BenchmarkInfo, 12> kBenchmarks = {{
    {BenchmarkFn::Bessel, "bessel", 1, -1.0, 1.0},
    {BenchmarkFn::Chaotic, "chaotic", 2, -1.0, 1.0},
    {BenchmarkFn::SimpleProduct, "simple-product", 2, -1.0, 1.0},
    {BenchmarkFn::HighFreqSum, "highfreq-sum", 1, -1.0, 1.0},
    {BenchmarkFn::HighlyNonlinear, "highly-nonlinear", 4, -1.0, 1.0},
    {BenchmarkFn::Discontinuous, "discontinuous", 1, -1.0, 1.0},
    {BenchmarkFn::OscillatingDecay, "oscillating-decay", 1, -1.0, 1.0},
    {BenchmarkFn::Rational, "rational", 2, -1.0, 1.0},
    {BenchmarkFn::MultiScale, "multiscale", 3, -1.0, 1.0},
    {BenchmarkFn::ExpSine, "exp-sine", 2, -1.0, 1.0},
    {BenchmarkFn::Sin, "sin", 1, -20.0, 20.0},
    {BenchmarkFn::Cos, "cos", 1, -20.0, 20.0},
}};

inline const BenchmarkInfo& benchmark_info(BenchmarkFn id) {
  for (const auto& b : kBenchmarks)
    if (b.id == id) return b;
  throw ParameterError("unknown benchmark id");
}

inline std::optional<BenchmarkFn> benchmark_from_name(std::string_view name) {
  for (const auto& b : kBenchmarks)
    if (b.name == name) return b.id;
  return std::nullopt;
}

inline double eval_benchmark(BenchmarkFn id, std::span<const double> x) {
  const auto& info = benchmark_info(id);
  if (x.size() != info.input_dim)
    throw ParameterError("eval_benchmark: " + std::string(info.name) + " takes " + std::to_string(info.input_dim) +
                         " inputs, got " + std::to_string(x.size()));
  constexpr double pi = std::numbers::pi;
  switch (id) {
    case BenchmarkFn::Bessel: return bessel_j0(20.0 * x[0]);
    case BenchmarkFn::Chaotic: return std::exp(std::sin(pi * x[0]) + x[1] * x[1]);
    case BenchmarkFn::SimpleProduct: return x[0] * x[1];
    case BenchmarkFn::HighFreqSum: {
      double s = 0.0;
      for (int k = 1; k <= 100; ++k) s += std::sin(k * x[0] / 100.0);
      return s;
    }
    case BenchmarkFn::HighlyNonlinear:
      return std::exp(std::sin(x[0] * x[0] + x[1] * x[1]) + std::sin(x[2] * x[2] + x[3] * x[3]));
    case BenchmarkFn::Discontinuous: {
      const double t = x[0];
      if (t < -0.5) return -1.0;
      if (t < 0.0) return t * t;
      if (t < 0.5) return std::sin(4.0 * pi * t);
      return 1.0;
    }
    case BenchmarkFn::OscillatingDecay: return std::exp(-x[0] * x[0]) * std::sin(10.0 * pi * x[0]);
    case BenchmarkFn::Rational: {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return r2 / (1.0 + r2);
    }
    case BenchmarkFn::MultiScale:
      return std::tanh(x[0] * x[1] * x[2]) + std::sin(pi * x[0]) * std::cos(pi * x[1]) * std::exp(-x[2] * x[2]);
    case BenchmarkFn::ExpSine: {
      const double dx = x[0] - 0.5, dy = x[1] - 0.5;
      return std::sin(50.0 * x[0]) * std::cos(50.0 * x[1]) + std::exp(-(dx * dx + dy * dy) / 0.1);
    }
    case BenchmarkFn::Sin: return std::sin(x[0]);
    case BenchmarkFn::Cos: return std::cos(x[0]);
  }
  throw ParameterError("unknown benchmark id");
}

inline Dataset sample_function_dataset(BenchmarkFn id, std::size_t n, Rng& rng, Split split) {
  const auto& info = benchmark_info(id);
  Dataset d;
  d.x = Matrix(n, info.input_dim);
  d.y = Matrix(n, 1);
  d.split = split;
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : d.x.row(r)) v = rng.uniform(info.lo, info.hi);
    d.y(r, 0) = eval_benchmark(id, d.x.row(r));
  }
  return d;
}

/// Uniform samples over the function's domain; train and test use separate streams.
inline std::pair<Dataset, Dataset> make_function_dataset(BenchmarkFn id, std::size_t n_train, std::size_t n_test,
                                                         std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw ParameterError("make_function_dataset: counts must be >= 1");
  const Rng root(seed);
  Rng train_rng = root.fork(1), test_rng = root.fork(2);
  return {sample_function_dataset(id, n_train, train_rng, Split::Train),
          sample_function_dataset(id, n_test, test_rng, Split::Test)};
}

inline Dataset grid_dataset(BenchmarkFn id, std::size_t n, double lo, double hi, Split split) {
  Dataset d;
  d.x = Matrix(n, 1);
  d.y = Matrix(n, 1);
  d.split = split;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    d.x(i, 0) = i + 1 == n ? hi : t;
    d.y(i, 0) = eval_benchmark(id, d.x.row(i));
  }
  return d;
}

inline void require_sincos(BenchmarkFn which) {
  if (which != BenchmarkFn::Sin && which != BenchmarkFn::Cos)
    throw ParameterError("make_sincos_dataset: only Sin or Cos");
}

/// 1000 evenly spaced points on [-20, 20], endpoints included.
inline Dataset make_sincos_dataset(BenchmarkFn which) {
  require_sincos(which);
  return grid_dataset(which, 1000, -20.0, 20.0, Split::Train);
}

/// The 999 midpoints between consecutive training points.
inline Dataset make_sincos_test_dataset(BenchmarkFn which) {
  require_sincos(which);
  const double h = 40.0 / 999.0;
  return grid_dataset(which, 999, -20.0 + 0.5 * h, 20.0 - 0.5 * h, Split::Test);
}

}  // namespace kaf
