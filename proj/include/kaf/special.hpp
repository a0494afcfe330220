#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

namespace kaf {

/// erf backed by the C library; odd symmetry is forced so erf(-x) == -erf(x) bit for bit.
inline double erf_approx(double x) noexcept {
  const double r = std::erf(std::fabs(x));
  return x < 0.0 ? -r : r;
}

inline double normal_cdf(double x) noexcept {
  return 0.5 * (1.0 + erf_approx(x * (0.5 * std::numbers::sqrt2)));
}

inline double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi * (0.5 * std::numbers::sqrt2));
}

/// Exact-CDF GELU, x * Phi(x).
inline double gelu(double x) noexcept { return x * normal_cdf(x); }
inline double gelu_grad(double x) noexcept { return normal_cdf(x) + x * normal_pdf(x); }

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double silu(double x) noexcept { return x * sigmoid(x); }
inline double silu_grad(double x) noexcept {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

inline double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }
/// Subgradient at 0 is 0.
inline double relu_grad(double x) noexcept { return x > 0.0 ? 1.0 : 0.0; }

namespace detail {

template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    // Newton iteration on P_N from the Chebyshev initial guess.
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (std::size_t k = 1; k <= N; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
        }
        dp = static_cast<double>(N) * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      nodes[i] = -z;
      nodes[N - 1 - i] = z;
      weights[i] = w;
      weights[N - 1 - i] = w;
    }
  }
};

inline const GaussLegendre<64>& gauss_legendre_64() {
  static const GaussLegendre<64> rule;
  return rule;
}

}  // namespace detail

/// Bessel J0 from (1/pi) * integral_0^pi cos(x sin t) dt with 64-node Gauss-Legendre.
/// Accurate to ~1e-14 for |x| <= 40.
inline double bessel_j0(double x) noexcept {
  const auto& gl = detail::gauss_legendre_64();
  const double ax = std::fabs(x);
  const double half = 0.5 * std::numbers::pi;
  double s = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double t = half * (gl.nodes[i] + 1.0);
    s += gl.weights[i] * std::cos(ax * std::sin(t));
  }
  return s * half / std::numbers::pi;
}

}  // namespace kaf
