#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kaf/accounting.hpp"
#include "kaf/benchmarks.hpp"
#include "kaf/kernel_check.hpp"
#include "kaf/sigma_opt.hpp"
#include "kaf/spectrum_compare.hpp"

using namespace kaf;

namespace {

LayerDims dims(std::size_t i, std::size_t o, std::size_t g = 5, std::size_t k = 3, std::size_t m = 9) {
  LayerDims d;
  d.d_in = i;
  d.d_out = o;
  d.grid = g;
  d.order = k;
  d.num_grids = m;
  return d;
}

/// Unfolded trapezoid transform over [-L, L], evaluated directly.
double direct_gelu_power(double omega, double half_width, double taper, double dx) {
  const auto n = static_cast<long>(std::llround(half_width / dx));
  double re = 0.0, im = 0.0;
  for (long j = -n; j <= n; ++j) {
    const double x = j * dx;
    const double w = (j == -n || j == n ? 0.5 : 1.0) * dx * std::exp(-x * x / (2 * taper * taper));
    re += w * gelu(x) * std::cos(omega * x);
    im -= w * gelu(x) * std::sin(omega * x);
  }
  return (re * re + im * im) / (2 * std::numbers::pi);
}

}  // namespace

TEST(Accounting, WorkedExamples) {
  EXPECT_EQ(params_formula(ModelKind::Mlp, dims(784, 128)), 100480u);
  EXPECT_EQ(params_formula(ModelKind::Kan, dims(4, 4)), 180u);
  EXPECT_EQ(params_formula(ModelKind::Kaf, dims(4, 4)), 73u);
  EXPECT_EQ(params_actual(ModelKind::Kaf, dims(4, 4)), 145u);
  EXPECT_EQ(count_flops(ModelKind::Mlp, dims(784, 128)), 201344u);
  EXPECT_EQ(count_flops(ModelKind::Kaf, dims(4, 4)), 204u);
  EXPECT_EQ(count_flops(ModelKind::Kan, dims(2, 2)), 1062u);
}

TEST(Accounting, ActualCountsMatchFormulasUpToV) {
  for (std::size_t i : {1u, 3u, 16u})
    for (std::size_t o : {1u, 5u})
      for (std::size_t m : {1u, 9u, 20u}) {
        const auto d = dims(i, o, 5, 3, m);
        EXPECT_EQ(params_actual(ModelKind::Kaf, d), params_formula(ModelKind::Kaf, d) + 2 * i * m);
        EXPECT_EQ(params_actual(ModelKind::Mlp, d), params_formula(ModelKind::Mlp, d));
      }
}

TEST(Accounting, KanActualCount) {
  // Per edge: G + K coefficients and two scales; one fewer than the closed form, and no bias.
  const auto d = dims(4, 4);
  EXPECT_EQ(params_actual(ModelKind::Kan, d), 4u * 4u * (5 + 3 + 2));
}

TEST(Accounting, KanFlopsEvenAndOddOrders) {
  for (std::size_t k : {1u, 2u, 3u, 4u}) {
    const auto d = dims(3, 2, 7, k);
    const double bracket = 9.0 * k * (7 + 1.5 * k) + 2.0 * 7 - 2.5 * k + 3;
    EXPECT_EQ(static_cast<double>(count_flops(ModelKind::Kan, d)), 7.0 * 3 + 6.0 * bracket);
  }
}

TEST(Accounting, RejectsZeroDims) {
  EXPECT_THROW(params_formula(ModelKind::Mlp, dims(0, 3)), ParameterError);
  EXPECT_THROW(count_flops(ModelKind::Kaf, dims(2, 2, 5, 3, 0)), ParameterError);
}

TEST(KernelCheck, SelfInnerProductIsOne) {
  Rng rng(1);
  const auto rff = RandomFourierFeatures::sample(4, 64, 1.0, rng);
  const std::vector<double> x{0.3, -0.2, 0.9, 0.0};
  const auto z = rff.map(x.data());
  EXPECT_NEAR(dot(z, z), 1.0, 1e-12);
  EXPECT_EQ(gaussian_kernel(x.data(), x.data(), 4, 1.0), 1.0);
}

TEST(KernelCheck, LargeFeatureCountIsAccurate) {
  const auto r = kernel_approx_check(4096, 1.0, 4, 200, 0);
  EXPECT_LT(r.sup_error, 0.1);
  EXPECT_DOUBLE_EQ(r.diam, 4.0);
  EXPECT_DOUBLE_EQ(r.sigma_p, 1.0);
}

TEST(KernelCheck, ErrorShrinksLikeInverseRootM) {
  std::vector<double> ratios;
  for (std::uint64_t s = 0; s < 10; ++s)
    ratios.push_back(kernel_approx_check(4096, 1.0, 4, 200, s).mean_error /
                     kernel_approx_check(1024, 1.0, 4, 200, s).mean_error);
  std::sort(ratios.begin(), ratios.end());
  const double med = 0.5 * (ratios[4] + ratios[5]);
  EXPECT_GE(med, 0.35);
  EXPECT_LE(med, 0.7);
}

TEST(KernelCheck, Deterministic) {
  EXPECT_EQ(kernel_approx_check(128, 0.7, 3, 20, 5).mean_error, kernel_approx_check(128, 0.7, 3, 20, 5).mean_error);
  EXPECT_THROW(kernel_approx_check(0, 1.0, 4, 10, 0), ParameterError);
}

TEST(SigmaOpt, SpectrumMatchesDirectTransform) {
  const GeluSpectrum s(60.0, 8.0, 0.05);
  for (double w : {0.0, 0.5, 2.0, 7.5, -3.0}) {
    const double ref = direct_gelu_power(w, 60.0, 8.0, 0.05);
    EXPECT_NEAR(s(w), ref, 1e-9 * std::max(1.0, ref)) << w;
  }
}

TEST(SigmaOpt, SpectrumIsEvenAndDecays) {
  const GeluSpectrum s(60.0, 8.0, 0.05);
  EXPECT_NEAR(s(3.3), s(-3.3), 1e-12 * s(3.3));
  EXPECT_LT(s(10.0), s(5.0));
}

TEST(SigmaOpt, DerivesAlphaNearDefault) {
  const auto r = derive_sigma_opt(SigmaOptConfig{});
  EXPECT_GE(r.alpha_opt, 1.5);
  EXPECT_LE(r.alpha_opt, 1.8);
  EXPECT_NEAR(r.integral_S, 0.168, 0.25 * 0.168);
  EXPECT_NEAR(r.integral_S2, 0.062, 0.25 * 0.062);
  EXPECT_EQ(r.n_mc, 20000u);
  EXPECT_EQ(r.omega.size(), 801u);
  EXPECT_NEAR(r.omega.front(), -20.0, 1e-12);
  EXPECT_NEAR(r.omega.back(), 20.0, 1e-12);
}

TEST(SigmaOpt, ScaleInvariantRatio) {
  // alpha^2 * anchor is the convention-free ratio (int S)^2 / int S^2.
  SigmaOptConfig a, b;
  b.normalization_anchor = 1.0;
  const auto ra = derive_sigma_opt(a), rb = derive_sigma_opt(b);
  EXPECT_NEAR(ra.alpha_opt * ra.alpha_opt * 0.168, rb.alpha_opt * rb.alpha_opt, 1e-12);
  EXPECT_NEAR(ra.raw_integral_S, rb.raw_integral_S, 1e-12);
}

TEST(SigmaOpt, StableUnderWiderWindowAndMoreSamples) {
  SigmaOptConfig base, wide, dense;
  wide.half_width = 120.0;
  dense.n_mc = 80000;
  const double a0 = derive_sigma_opt(base).alpha_opt;
  EXPECT_NEAR(derive_sigma_opt(wide).alpha_opt, a0, 1e-3 * a0);
  EXPECT_NEAR(derive_sigma_opt(dense).alpha_opt, a0, 1e-3 * a0);
}

TEST(SigmaOpt, RejectsUnderSpecifiedRuns) {
  SigmaOptConfig c;
  c.n_mc = 100;
  EXPECT_THROW(derive_sigma_opt(c), ParameterError);
  c = {};
  c.half_width = 30.0;
  EXPECT_THROW(derive_sigma_opt(c), ParameterError);
  c = {};
  c.grid.omega_step = 0.1;
  EXPECT_THROW(derive_sigma_opt(c), ParameterError);
}

TEST(SpectrumCompare, IdenticalSpectra) {
  const Dataset d = make_sincos_dataset(BenchmarkFn::Sin);
  const auto c = compare_spectra(std::vector<double>(d.y.values().begin(), d.y.values().end()), d);
  EXPECT_TRUE(c.peak_match);
  EXPECT_EQ(c.model.magnitudes, c.truth.magnitudes);
}

TEST(SpectrumCompare, ZeroModelMisses) {
  const Dataset d = make_sincos_dataset(BenchmarkFn::Sin);
  const auto c = compare_spectra(std::vector<double>(d.size(), 0.0), d);
  EXPECT_FALSE(c.peak_match);
  // 40 units span about 6.4 periods of sin, so the truth peaks at bin 6.
  EXPECT_EQ(c.truth.peak_bin(), 6u);
  EXPECT_NEAR(c.truth.frequencies[6], 1.0 / (2 * std::numbers::pi), 1.0 / 40.0);
}

TEST(SpectrumCompare, RejectsUnevenGrid) {
  Dataset d = make_sincos_dataset(BenchmarkFn::Sin);
  d.x(10, 0) += 0.01;
  EXPECT_THROW(compare_spectra(std::vector<double>(d.size(), 0.0), d), ParameterError);
}
