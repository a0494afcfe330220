#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/rng.hpp"
#include "kaf/special.hpp"

namespace kaf {

/// Frequency band and tabulation grid for the GELU power spectrum.
struct SpectrumGrid {
  double omega_max = 20.0;
  double omega_step = 0.05;
};

struct SigmaOptConfig {
  std::size_t n_mc = 20000;
  SpectrumGrid grid;
  double half_width = 60.0;   // GELU is windowed to [-L, L]
  double taper_width = 8.0;   // Gaussian taper exp(-x^2 / (2 s^2))
  double x_step = 0.05;
  std::uint64_t seed = 0;
  /// The spectrum is rescaled so that its integral over the band equals this value.
  double normalization_anchor = 0.168;
};

struct SigmaOptReport {
  double integral_S = 0.0;
  double integral_S2 = 0.0;
  double alpha_opt = 0.0;
  std::size_t n_mc = 0;
  double raw_integral_S = 0.0;   // before rescaling
  double raw_integral_S2 = 0.0;
  double scale = 1.0;            // S = scale * S_raw
  std::vector<double> omega;     // tabulation grid
  std::vector<double> spectrum;  // normalized S on the grid
};

/// Power spectrum of the tapered GELU under the unitary angular-frequency
/// transform, F(w) = (2 pi)^-1/2 * integral f(x) exp(-i w x) dx, by the
/// trapezoid rule on a symmetric grid.
class GeluSpectrum {
public:
  GeluSpectrum(double half_width, double taper_width, double x_step) {
    if (!(half_width > 0.0) || !(taper_width > 0.0) || !(x_step > 0.0))
      throw ParameterError("gelu spectrum: widths and step must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(half_width / x_step));
    const double inv2s2 = 1.0 / (2.0 * taper_width * taper_width);
    // f(x) = even + odd parts folded onto x >= 0.
    x_.resize(n + 1);
    even_.resize(n + 1);
    odd_.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      const double x = static_cast<double>(j) * x_step;
      const double w = (j == n ? 0.5 : 1.0) * x_step * std::exp(-x * x * inv2s2);
      x_[j] = x;
      if (j == 0) {
        even_[j] = gelu(0.0) * w;
        odd_[j] = 0.0;
      } else {
        even_[j] = (gelu(x) + gelu(-x)) * w;
        odd_[j] = (gelu(x) - gelu(-x)) * w;
      }
    }
  }

  double operator()(double omega) const {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      const double p = omega * x_[j];
      re += even_[j] * std::cos(p);
      im -= odd_[j] * std::sin(p);
    }
    return (re * re + im * im) / (2.0 * std::numbers::pi);
  }

private:
  std::vector<double> x_, even_, odd_;
};

/// Optimal GELU rescaling alpha = sqrt(int S / int S^2) for a white target
/// spectrum. Both integrals are stratified Monte Carlo estimates over
/// [-omega_max, omega_max]; S is even, so only [0, omega_max] is sampled.
inline SigmaOptReport derive_sigma_opt(const SigmaOptConfig& cfg) {
  if (cfg.n_mc < 10000) throw ParameterError("derive_sigma_opt: n_mc must be >= 1e4");
  if (cfg.grid.omega_max < 20.0 || !(cfg.grid.omega_step > 0.0) || cfg.grid.omega_step > 0.05)
    throw ParameterError("derive_sigma_opt: grid must cover |omega| <= 20 with spacing <= 0.05");
  if (cfg.half_width < 40.0) throw ParameterError("derive_sigma_opt: window half-width must be >= 40");
  if (!(cfg.normalization_anchor > 0.0)) throw ParameterError("derive_sigma_opt: normalization anchor must be > 0");

  const GeluSpectrum spectrum(cfg.half_width, cfg.taper_width, cfg.x_step);
  Rng rng(cfg.seed);
  const double width = cfg.grid.omega_max / static_cast<double>(cfg.n_mc);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < cfg.n_mc; ++k) {
    const double omega = (static_cast<double>(k) + rng.uniform01()) * width;
    const double s = spectrum(omega);
    s1 += s;
    s2 += s * s;
  }
  SigmaOptReport rep;
  rep.n_mc = cfg.n_mc;
  rep.raw_integral_S = 2.0 * width * s1;
  rep.raw_integral_S2 = 2.0 * width * s2;
  rep.scale = cfg.normalization_anchor / rep.raw_integral_S;
  rep.integral_S = rep.scale * rep.raw_integral_S;
  rep.integral_S2 = rep.scale * rep.scale * rep.raw_integral_S2;
  rep.alpha_opt = std::sqrt(rep.integral_S / rep.integral_S2);

  const auto steps = static_cast<std::size_t>(std::llround(2.0 * cfg.grid.omega_max / cfg.grid.omega_step));
  rep.omega.resize(steps + 1);
  rep.spectrum.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double w = -cfg.grid.omega_max + cfg.grid.omega_step * static_cast<double>(i);
    rep.omega[i] = w;
    rep.spectrum[i] = rep.scale * spectrum(w);
  }
  return rep;
}

}  // namespace kaf
