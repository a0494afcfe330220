#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "kaf/error.hpp"

namespace kaf {

inline constexpr double kLayerNormEps = 1e-5;

/// Affine-free layer normalization with population variance.
/// Writes the normalized row to `out` and returns 1/sqrt(var + eps).
inline double layernorm_into(std::span<const double> x, std::span<double> out, double eps = kLayerNormEps) {
  if (x.size() < 2) throw ParameterError("layernorm: row length must be >= 2");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double inv_std = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv_std;
  return inv_std;
}

inline std::vector<double> layernorm(std::span<const double> x, double eps = kLayerNormEps) {
  std::vector<double> out(x.size());
  layernorm_into(x, out, eps);
  return out;
}

/// Backward of layernorm_into given the normalized row and its inverse std.
inline void layernorm_backward(std::span<const double> normed, double inv_std, std::span<const double> d_normed,
                               std::span<double> d_input) {
  const double n = static_cast<double>(normed.size());
  double mean_d = 0.0, mean_dx = 0.0;
  for (std::size_t i = 0; i < normed.size(); ++i) {
    mean_d += d_normed[i];
    mean_dx += d_normed[i] * normed[i];
  }
  mean_d /= n;
  mean_dx /= n;
  for (std::size_t i = 0; i < normed.size(); ++i)
    d_input[i] = inv_std * (d_normed[i] - mean_d - normed[i] * mean_dx);
}

}  // namespace kaf
