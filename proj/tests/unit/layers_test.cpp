#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kaf/bspline.hpp"
#include "kaf/kaf_layer.hpp"
#include "kaf/kan_layer.hpp"
#include "kaf/layernorm.hpp"
#include "kaf/mlp_layer.hpp"
#include "kaf/network.hpp"
#include "support/oracles.hpp"

using namespace kaf;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

KafLayer random_kaf(std::size_t d_in, std::size_t d_out, std::size_t m, Rng& rng) {
  KafLayer l = kaf_init(d_in, d_out, m, 1.64, rng);
  for (auto& v : l.v.values()) v = rng.normal();
  for (auto& v : l.a) v = rng.uniform(0.5, 1.5);
  for (auto& v : l.b) v = rng.uniform(0.5, 1.5);
  for (auto& v : l.c) v = rng.normal();
  return l;
}

/// Direct evaluation of h_q = sum_i W_out[q,i] (a_i gelu(x_i) + b_i sum_j V[i,j] psi_ij) + c_q.
double kaf_scalar(const KafLayer& l, const std::vector<double>& x, std::size_t q) {
  const std::size_t m = l.num_grids();
  double out = l.c[q];
  for (std::size_t i = 0; i < l.d_in(); ++i) {
    double phi = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      phi += l.v(i, j) * std::sqrt(1.0 / m) * std::cos(l.w_freq(i, j) * x[i] + l.theta[j]);
      phi += l.v(i, m + j) * std::sqrt(1.0 / m) * std::sin(l.w_freq(i, j) * x[i] + l.theta[j]);
    }
    const double g = x[i] * 0.5 * (1.0 + oracle::erf_series(x[i] / std::sqrt(2.0)));
    out += l.w_out(q, i) * (l.a[i] * g + l.b[i] * phi);
  }
  return out;
}

}  // namespace

TEST(KafInit, ScalesAndBounds) {
  Rng rng(1);
  const KafLayer l = kaf_init(64, 64, 9, 1.64, rng);
  for (double a : l.a) EXPECT_EQ(a, 1.0);
  for (double b : l.b) EXPECT_EQ(b, 0.01);
  for (double c : l.c) EXPECT_EQ(c, 0.0);
  const double bound = std::sqrt(6.0 / 128.0);
  for (double w : l.w_out.values()) EXPECT_LE(std::fabs(w), bound);
  for (double t : l.theta) {
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 2 * std::numbers::pi);
  }
  EXPECT_EQ(l.w_freq.rows(), 64u);
  EXPECT_EQ(l.w_freq.cols(), 9u);
  EXPECT_EQ(l.v.cols(), 18u);
}

TEST(KafInit, FrequencyStd) {
  Rng rng(2);
  const KafLayer l = kaf_init(10000, 1, 10, 1.64, rng);
  double sq = 0.0, mean = 0.0;
  for (double w : l.w_freq.values()) mean += w;
  mean /= l.w_freq.size();
  for (double w : l.w_freq.values()) sq += (w - mean) * (w - mean);
  const double sd = std::sqrt(sq / l.w_freq.size());
  EXPECT_GE(sd, 1.62);
  EXPECT_LE(sd, 1.66);
}

TEST(KafInit, UniformFrequencies) {
  Rng rng(3);
  KafConfig cfg;
  cfg.d_in = 100;
  cfg.num_grids = 20;
  cfg.rff_init = RffInit::Uniform;
  const KafLayer l = kaf_init(cfg, rng);
  for (double w : l.w_freq.values()) {
    EXPECT_GE(w, -1.0);
    EXPECT_LT(w, 1.0);
  }
}

TEST(KafConfig, RejectsBothPathsDisabled) {
  Rng rng(0);
  KafConfig cfg;
  cfg.disable_gelu_path = cfg.disable_rff_path = true;
  EXPECT_THROW(kaf_init(cfg, rng), ParameterError);
  cfg.disable_rff_path = false;
  cfg.num_grids = 0;
  EXPECT_THROW(kaf_init(cfg, rng), ParameterError);
}

TEST(KafBasis, ZeroInputZeroPhase) {
  Rng rng(4);
  KafLayer l = kaf_init(3, 2, 4, 1.64, rng);
  std::fill(l.theta.begin(), l.theta.end(), 0.0);
  const Matrix psi = kaf_basis(l, std::vector<double>{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(psi(i, j), std::sqrt(0.25));
      EXPECT_EQ(psi(i, 4 + j), 0.0);
    }
}

TEST(KafBasis, UnitNormAndScalarOracle) {
  Rng rng(5);
  const KafLayer l = kaf_init(4, 2, 7, 1.64, rng);
  const std::vector<double> x{0.3, -1.2, 2.5, 0.0};
  const Matrix psi = kaf_basis(l, x);
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 14; ++j) s += psi(i, j) * psi(i, j);
    EXPECT_NEAR(s, 1.0, 1e-12);
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_NEAR(psi(i, j), std::cos(l.w_freq(i, j) * x[i] + l.theta[j]) / std::sqrt(7.0), 1e-12);
      EXPECT_NEAR(psi(i, 7 + j), std::sin(l.w_freq(i, j) * x[i] + l.theta[j]) / std::sqrt(7.0), 1e-12);
    }
  }
}

TEST(KafForward, ReducesToGelu) {
  Rng rng(6);
  KafConfig cfg;
  cfg.d_in = cfg.d_out = 3;
  cfg.disable_rff_path = true;
  KafLayer l = kaf_init(cfg, rng);
  l.w_out = Matrix::identity(3);
  const Matrix x = random_matrix(4, 3, rng, -3, 3);
  const Matrix h = kaf_forward(l, x, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(h.values()[i], gelu(x.values()[i]));
}

TEST(KafForward, ZeroGateIgnoresFourierParameters) {
  Rng rng(7);
  KafLayer l = random_kaf(3, 2, 4, rng);
  std::fill(l.b.begin(), l.b.end(), 0.0);
  const Matrix x = random_matrix(5, 3, rng);
  const Matrix before = kaf_forward(l, x, nullptr);
  for (auto& v : l.v.values()) v += 3.0;
  for (auto& w : l.w_freq.values()) w *= -2.0;
  EXPECT_EQ(kaf_forward(l, x, nullptr), before);
}

TEST(KafForward, MatchesScalarOracle) {
  Rng rng(8);
  const KafLayer l = random_kaf(3, 2, 4, rng);
  const Matrix x = random_matrix(6, 3, rng, -2, 2);
  const Matrix h = kaf_forward(l, x, nullptr);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const std::vector<double> row(x.row(r).begin(), x.row(r).end());
    for (std::size_t q = 0; q < 2; ++q) EXPECT_NEAR(h(r, q), kaf_scalar(l, row, q), 1e-12);
  }
}

TEST(KafForward, ShapeMismatchThrows) {
  Rng rng(9);
  const KafLayer l = kaf_init(3, 2, 4, 1.64, rng);
  EXPECT_THROW(kaf_forward(l, Matrix(2, 4), nullptr), ShapeError);
}

TEST(KafBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(10);
  KafLayer l = random_kaf(3, 2, 4, rng);
  KafCache cache;
  kaf_forward(l, random_matrix(5, 3, rng), &cache);
  auto g = kaf_backward(l, cache, Matrix(5, 2));
  for (const auto& t : tensors(g.params))
    for (double v : t.values) EXPECT_EQ(v, 0.0);
  for (double v : g.d_input.values()) EXPECT_EQ(v, 0.0);
}

TEST(KafBackward, MatchesFiniteDifferences) {
  Rng rng(11);
  for (bool ln : {false, true}) {
    KafConfig cfg;
    cfg.d_in = 3;
    cfg.d_out = 2;
    cfg.num_grids = 4;
    cfg.use_layernorm = ln;
    Network net;
    KafLayer l = kaf_init(cfg, rng);
    for (auto& v : l.v.values()) v = rng.normal();
    net.layers.emplace_back(l);
    const Matrix x = random_matrix(5, 3, rng);
    Matrix w(5, 2);
    for (auto& v : w.values()) v = rng.normal();
    EXPECT_LT(oracle::network_fd_error(net, x, w), 1e-4) << "layernorm=" << ln;
  }
}

TEST(KafBackward, InputGradientMatchesFiniteDifference) {
  Rng rng(12);
  const KafLayer l = random_kaf(3, 2, 4, rng);
  Matrix x = random_matrix(2, 3, rng);
  Matrix w(2, 2);
  for (auto& v : w.values()) v = rng.normal();
  KafCache cache;
  kaf_forward(l, x, &cache);
  const auto g = kaf_backward(l, cache, w);
  auto obj = [&] {
    const Matrix h = kaf_forward(l, x, nullptr);
    double s = 0;
    for (std::size_t i = 0; i < h.size(); ++i) s += h.values()[i] * w.values()[i];
    return s;
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double o = x.values()[i], h = 1e-5;
    x.values()[i] = o + h;
    const double up = obj();
    x.values()[i] = o - h;
    const double dn = obj();
    x.values()[i] = o;
    EXPECT_LT(oracle::rel_err((up - dn) / (2 * h), g.d_input.values()[i], 1e-6), 1e-5);
  }
}

TEST(KafBackward, ThetaGradientOnScalarPath) {
  KafConfig cfg;
  cfg.num_grids = 1;
  KafLayer l = kaf_zeros(cfg);
  l.w_freq(0, 0) = 0.7;
  l.theta[0] = 0.4;
  l.v(0, 0) = 1.3;
  l.v(0, 1) = -0.6;
  l.a[0] = 1.0;
  l.b[0] = 0.5;
  l.w_out(0, 0) = 2.0;
  const double x = 0.9;
  KafCache cache;
  kaf_forward(l, Matrix(1, 1, x), &cache);
  const auto g = kaf_backward(l, cache, Matrix(1, 1, 1.0));
  const double p = 0.7 * x + 0.4;
  // d/dtheta of 2 * 0.5 * (1.3 cos p - 0.6 sin p), with sqrt(1/M) = 1.
  const double expected = 2.0 * 0.5 * (-1.3 * std::sin(p) - 0.6 * std::cos(p));
  EXPECT_NEAR(g.params.theta[0], expected, 1e-14);
  EXPECT_NEAR(g.params.w_freq(0, 0), expected * x, 1e-14);
}

TEST(KafBackward, ScalesFrozenWhenDisabled) {
  Rng rng(13);
  KafConfig cfg;
  cfg.d_in = 2;
  cfg.d_out = 2;
  cfg.num_grids = 3;
  cfg.disable_scales = true;
  KafLayer l = kaf_init(cfg, rng);
  KafCache cache;
  kaf_forward(l, random_matrix(3, 2, rng), &cache);
  Matrix up(3, 2, 1.0);
  const auto g = kaf_backward(l, cache, up);
  for (double v : g.params.a) EXPECT_EQ(v, 0.0);
  for (double v : g.params.b) EXPECT_EQ(v, 0.0);
}

TEST(KafBackward, ClipsFrequencyGradient) {
  Rng rng(14);
  KafLayer l = random_kaf(3, 2, 4, rng);
  KafCache cache;
  kaf_forward(l, random_matrix(5, 3, rng), &cache);
  Matrix up(5, 2, 10.0);
  const auto free = kaf_backward(l, cache, up);
  const auto clipped = kaf_backward(l, cache, up, BackwardOptions{0.01});
  EXPECT_GT(frobenius_norm(free.params.w_freq.values()), 0.01);
  EXPECT_NEAR(frobenius_norm(clipped.params.w_freq.values()), 0.01, 1e-12);
  EXPECT_EQ(clipped.params.v, free.params.v);
}

TEST(KafBackward, StaleCacheThrows) {
  Rng rng(15);
  const KafLayer small = kaf_init(2, 2, 3, 1.64, rng);
  const KafLayer big = kaf_init(3, 2, 3, 1.64, rng);
  KafCache cache;
  kaf_forward(small, random_matrix(2, 2, rng), &cache);
  EXPECT_THROW(kaf_backward(big, cache, Matrix(2, 2)), ContractError);
}

TEST(KafFold, IdentityScalesGiveGeluWeights) {
  Rng rng(16);
  KafLayer l = kaf_init(3, 2, 4, 1.64, rng);
  std::fill(l.b.begin(), l.b.end(), 0.0);
  const FoldedKaf f = kaf_fold_inference(l);
  EXPECT_EQ(f.w_gelu, l.w_out);
  for (double v : f.w_fourier.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(f.parameter_count(), 2u * 3 + 2u * 3 * 8 + 2);
}

TEST(KafFold, AgreesWithUnfoldedForward) {
  Rng rng(17);
  for (bool ln : {false, true}) {
    KafConfig cfg;
    cfg.d_in = 4;
    cfg.d_out = 3;
    cfg.num_grids = 5;
    cfg.use_layernorm = ln;
    KafLayer l = kaf_init(cfg, rng);
    for (auto& v : l.v.values()) v = rng.normal();
    for (auto& v : l.b) v = rng.uniform(-1, 1);
    const Matrix x = random_matrix(100, 4, rng, -3, 3);
    const Matrix a = kaf_forward(l, x, nullptr), b = folded_forward(kaf_fold_inference(l), x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-10);
  }
}

TEST(LayerNorm, ConstantRowIsZero) {
  for (double v : layernorm(std::vector<double>{2.0, 2.0, 2.0, 2.0})) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, HandComputed) {
  const auto y = layernorm(std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_NEAR(y[0], -1.2247, 1e-4);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
  EXPECT_NEAR(y[2], 1.2247, 1e-4);
}

TEST(LayerNorm, ZeroMeanUnitVariance) {
  Rng rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(16);
    for (auto& v : x) v = rng.uniform(-10, 10);
    const auto y = layernorm(x);
    double mean = 0, var = 0;
    for (double v : y) mean += v;
    mean /= y.size();
    for (double v : y) var += (v - mean) * (v - mean);
    var /= y.size();
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-6);
  }
  EXPECT_THROW(layernorm(std::vector<double>{1.0}), ParameterError);
}

TEST(BSpline, KnotVector) {
  const auto k = open_uniform_knots(5, 3, -1, 1);
  EXPECT_EQ(k.size(), 5u + 2 * 3 + 1);
  EXPECT_TRUE(std::is_sorted(k.begin(), k.end()));
  EXPECT_EQ(k.size() - 3 - 1, 8u);
  EXPECT_EQ(k.front(), -1.0);
  EXPECT_EQ(k.back(), 1.0);
}

TEST(BSpline, PartitionOfUnity) {
  for (std::size_t order : {1u, 2u, 3u, 5u}) {
    const auto k = open_uniform_knots(5, order, -1, 1);
    for (int i = 0; i <= 1000; ++i) {
      const double x = -1.0 + 2.0 * i / 1000.0;
      double s = 0.0;
      for (double b : bspline_basis(x, k, order)) s += b;
      EXPECT_NEAR(s, 1.0, 1e-9) << "order " << order << " x " << x;
    }
  }
}

TEST(BSpline, LinearHatPeak) {
  const auto k = open_uniform_knots(4, 1, 0, 1);
  const auto b = bspline_basis(0.5, k, 1);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_DOUBLE_EQ(b[2], 1.0);
  for (std::size_t i : {0u, 1u, 3u, 4u}) EXPECT_EQ(b[i], 0.0);
}

TEST(BSpline, MatchesRecursiveOracle) {
  const auto k = open_uniform_knots(5, 3, -1, 1);
  for (double x : {0.3, -0.999, -0.2, 0.6, 0.0, 1.0}) {
    const auto b = bspline_basis(x, k, 3);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(b[i], oracle::bspline(i, 3, x, k), 1e-12) << x;
  }
}

TEST(BSpline, DerivativeMatchesFiniteDifference) {
  const auto k = open_uniform_knots(5, 3, -1, 1);
  std::vector<double> b, d;
  for (double x : {-0.77, -0.1, 0.33, 0.91}) {
    bspline_basis_and_derivative(x, k, 3, b, d);
    const auto up = bspline_basis(x + 1e-6, k, 3), dn = bspline_basis(x - 1e-6, k, 3);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(d[i], (up[i] - dn[i]) / 2e-6, 1e-6);
  }
}

TEST(BSpline, ClampsOutsideDomain) {
  const auto k = open_uniform_knots(5, 3, -1, 1);
  EXPECT_EQ(bspline_basis(3.0, k, 3), bspline_basis(1.0, k, 3));
  EXPECT_EQ(bspline_basis(-3.0, k, 3), bspline_basis(-1.0, k, 3));
}

TEST(Kan, DefaultsAndBasisCount) {
  const KanConfig c;
  EXPECT_EQ(c.grid, 5u);
  EXPECT_EQ(c.order, 3u);
  EXPECT_EQ(c.lo, -1.0);
  EXPECT_EQ(c.hi, 1.0);
  EXPECT_EQ(c.basis_count(), 8u);
}

TEST(Kan, ZeroSplineScaleIsSiluLinearMap) {
  Rng rng(19);
  KanConfig cfg;
  cfg.d_in = 3;
  cfg.d_out = 2;
  KanLayer l = kan_init(cfg, rng);
  l.w_s.fill(0.0);
  const Matrix x = random_matrix(4, 3, rng);
  Matrix sx(4, 3);
  for (std::size_t i = 0; i < x.size(); ++i) sx.values()[i] = silu(x.values()[i]);
  const Matrix expected = matmul(sx, l.w_h.transposed());
  const Matrix out = kan_forward(l, x, nullptr);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.values()[i], expected.values()[i], 1e-14);
}

TEST(Kan, MatchesFiniteDifferences) {
  Rng rng(20);
  KanConfig cfg;
  cfg.d_in = 2;
  cfg.d_out = 2;
  cfg.grid = 3;
  cfg.order = 2;
  Network net;
  KanLayer l = kan_init(cfg, rng);
  for (auto& v : l.w_s.values()) v = rng.uniform(0.5, 1.5);
  net.layers.emplace_back(l);
  const Matrix x = random_matrix(5, 2, rng, -0.95, 0.95);
  Matrix w(5, 2);
  for (auto& v : w.values()) v = rng.normal();
  EXPECT_LT(oracle::network_fd_error(net, x, w), 1e-4);
}

TEST(Kan, LeastSquaresRecoversLinearFunction) {
  const auto k = open_uniform_knots(5, 3, -1, 1);
  std::vector<double> xs, ys;
  for (int i = 0; i <= 200; ++i) {
    xs.push_back(-1.0 + i / 100.0);
    ys.push_back(xs.back());
  }
  const auto c = fit_spline_coefficients(k, 3, xs, ys);
  for (double x = -0.9; x < 0.9; x += 0.05) {
    const auto b = bspline_basis(x, k, 3);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += c[i] * b[i];
    EXPECT_NEAR(s, x, 1e-6);
  }
}

TEST(Mlp, IdentityLayerIsIdentityMap) {
  MlpLayer l = mlp_zeros(3, 3, Activation::Identity);
  l.w = Matrix::identity(3);
  const Matrix x{{1, -2, 3}, {0.5, 0, -0.25}};
  EXPECT_EQ(mlp_forward(l, x, nullptr), x);
}

TEST(Mlp, MatchesFiniteDifferences) {
  Rng rng(21);
  for (Activation act : {Activation::GELU, Activation::ReLU, Activation::Identity}) {
    Network net = make_mlp_network({3, 4, 2}, act, rng);
    std::get<MlpLayer>(net.layers[0]).bias = {0.1, -0.2, 0.3, 0.05};
    const Matrix x = random_matrix(5, 3, rng);
    Matrix w(5, 2);
    for (auto& v : w.values()) v = rng.normal();
    EXPECT_LT(oracle::network_fd_error(net, x, w), 1e-4);
  }
}

TEST(Mlp, ReluZeroSubgradient) {
  MlpLayer l = mlp_zeros(1, 1, Activation::ReLU);
  l.w(0, 0) = 1.0;
  MlpCache cache;
  mlp_forward(l, Matrix(1, 1, 0.0), &cache);
  const auto g = mlp_backward(l, cache, Matrix(1, 1, 1.0));
  EXPECT_EQ(g.params.w(0, 0), 0.0);
  EXPECT_EQ(g.params.bias[0], 0.0);
}

TEST(Network, MixedStackGradients) {
  Rng rng(22);
  Network net;
  KafConfig kc;
  kc.d_in = 2;
  kc.d_out = 3;
  kc.num_grids = 3;
  net.layers.emplace_back(kaf_init(kc, rng));
  KanConfig nc;
  nc.d_in = 3;
  nc.d_out = 2;
  nc.grid = 4;
  net.layers.emplace_back(kan_init(nc, rng));
  net.layers.emplace_back(mlp_init(2, 1, Activation::Identity, rng));
  const Matrix x = random_matrix(4, 2, rng, -0.5, 0.5);
  Matrix w(4, 1);
  for (auto& v : w.values()) v = rng.normal();
  EXPECT_LT(oracle::network_fd_error(net, x, w), 1e-4);
  EXPECT_EQ(net.input_dim(), 2u);
  EXPECT_EQ(net.output_dim(), 1u);
}

TEST(Network, TensorNamesArePrefixed) {
  Rng rng(23);
  Network net = make_kaf_network({2, 2}, KafConfig{}, rng);
  const auto ts = tensors(net);
  ASSERT_EQ(ts.size(), 7u);
  EXPECT_EQ(ts[0].name, "layer0.W_freq");
  EXPECT_EQ(ts[6].name, "layer0.c");
}
