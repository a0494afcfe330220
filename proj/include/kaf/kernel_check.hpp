#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/rng.hpp"

namespace kaf {

struct KernelCheckReport {
  std::size_t m = 0;
  double sigma = 1.0;
  std::size_t d = 1;
  std::size_t n_pairs = 0;
  double sup_error = 0.0;
  double mean_error = 0.0;
  double diam = 0.0;     // diameter of [-1, 1]^d
  double sigma_p = 0.0;  // per-coordinate variance of the spectral measure, sigma^-2
};

/// Random Fourier features z(x) = sqrt(1/m) [cos(W^T x + b), sin(W^T x + b)].
struct RandomFourierFeatures {
  std::size_t d = 0;
  std::size_t m = 0;
  std::vector<double> w;      // d x m, row-major
  std::vector<double> phase;  // m

  /// Frequencies ~ N(0, sigma^-2 I_d), phases ~ U[0, 2 pi).
  static RandomFourierFeatures sample(std::size_t d, std::size_t m, double sigma, Rng& rng) {
    RandomFourierFeatures f{d, m, std::vector<double>(d * m), std::vector<double>(m)};
    for (auto& v : f.w) v = rng.normal() / sigma;
    for (auto& p : f.phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return f;
  }

  std::vector<double> map(const double* x) const {
    std::vector<double> z(2 * m);
    const double norm = std::sqrt(1.0 / static_cast<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
      double p = phase[j];
      for (std::size_t i = 0; i < d; ++i) p += w[i * m + j] * x[i];
      z[j] = norm * std::cos(p);
      z[m + j] = norm * std::sin(p);
    }
    return z;
  }
};

inline double gaussian_kernel(const double* x, const double* y, std::size_t d, double sigma) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-r2 / (2.0 * sigma * sigma));
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Compares z(x)^T z(y) with the Gaussian kernel over random pairs in [-1, 1]^d.
inline KernelCheckReport kernel_approx_check(std::size_t m, double sigma, std::size_t d, std::size_t n_pairs,
                                             std::uint64_t seed) {
  if (m < 1 || d < 1 || n_pairs < 1) throw ParameterError("kernel_approx_check: m, d, n_pairs must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("kernel_approx_check: sigma must be > 0");
  const Rng root(seed);
  Rng feature_rng = root.fork(1), pair_rng = root.fork(2);
  const auto rff = RandomFourierFeatures::sample(d, m, sigma, feature_rng);

  KernelCheckReport rep;
  rep.m = m;
  rep.sigma = sigma;
  rep.d = d;
  rep.n_pairs = n_pairs;
  rep.diam = 2.0 * std::sqrt(static_cast<double>(d));
  rep.sigma_p = 1.0 / (sigma * sigma);
  std::vector<double> x(d), y(d);
  double total = 0.0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    for (auto& v : x) v = pair_rng.uniform(-1.0, 1.0);
    for (auto& v : y) v = pair_rng.uniform(-1.0, 1.0);
    const double err = std::fabs(dot(rff.map(x.data()), rff.map(y.data())) - gaussian_kernel(x.data(), y.data(), d, sigma));
    rep.sup_error = std::max(rep.sup_error, err);
    total += err;
  }
  rep.mean_error = total / static_cast<double>(n_pairs);
  return rep;
}

}  // namespace kaf
