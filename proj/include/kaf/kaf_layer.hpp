#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/layernorm.hpp"
#include "kaf/matrix.hpp"
#include "kaf/rng.hpp"
#include "kaf/special.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

/// How the frequency matrix is drawn at init.
enum class RffInit {
  Gaussian,  ///< N(0, sigma_f^2)
  Uniform,   ///< U(-1, 1), ignoring sigma_f
};

struct KafConfig {
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::size_t num_grids = 9;
  double sigma_f = 1.64;
  bool use_layernorm = false;
  bool disable_gelu_path = false;
  bool disable_rff_path = false;
  /// Holds a = b = 1 as constants; their gradients are reported as zero.
  bool disable_scales = false;
  RffInit rff_init = RffInit::Gaussian;
};

/// Kolmogorov-Arnold-Fourier layer:
///   h = W_out (a * GELU(x~) + b * phi(x~)) + c,
///   phi_i(x~) = sum_j V[i, j] psi_i(x~_i)[j],
///   psi_i(t) = sqrt(1/M) [cos(W_freq[i, m] t + theta_m)]_m ++ [sin(...)]_m.
/// Every input dimension owns its M frequencies; the phases are shared.
struct KafLayer {
  KafConfig config;
  Matrix w_freq;              // d_in x M
  std::vector<double> theta;  // M
  Matrix v;                   // d_in x 2M
  std::vector<double> a;      // d_in
  std::vector<double> b;      // d_in
  Matrix w_out;               // d_out x d_in
  std::vector<double> c;      // d_out

  std::size_t d_in() const noexcept { return config.d_in; }
  std::size_t d_out() const noexcept { return config.d_out; }
  std::size_t num_grids() const noexcept { return config.num_grids; }

  double scale_a(std::size_t i) const noexcept { return config.disable_scales ? 1.0 : a[i]; }
  double scale_b(std::size_t i) const noexcept { return config.disable_scales ? 1.0 : b[i]; }
};

inline void validate_kaf_config(const KafConfig& cfg) {
  if (cfg.d_in < 1 || cfg.d_out < 1 || cfg.num_grids < 1)
    throw ParameterError("kaf layer: d_in, d_out and num_grids must be >= 1");
  if (!(cfg.sigma_f > 0.0)) throw ParameterError("kaf layer: sigma_f must be > 0");
  if (cfg.disable_gelu_path && cfg.disable_rff_path)
    throw ParameterError("kaf layer: cannot disable both the GELU and the RFF path");
  if (cfg.use_layernorm && cfg.d_in < 2) throw ParameterError("kaf layer: layernorm needs d_in >= 2");
}

inline KafLayer kaf_zeros(const KafConfig& cfg) {
  KafLayer z;
  z.config = cfg;
  z.w_freq = Matrix(cfg.d_in, cfg.num_grids);
  z.theta.assign(cfg.num_grids, 0.0);
  z.v = Matrix(cfg.d_in, 2 * cfg.num_grids);
  z.a.assign(cfg.d_in, 0.0);
  z.b.assign(cfg.d_in, 0.0);
  z.w_out = Matrix(cfg.d_out, cfg.d_in);
  z.c.assign(cfg.d_out, 0.0);
  return z;
}

/// Zero-valued layer with the same shapes, used as a gradient container.
inline KafLayer kaf_zeros_like(const KafLayer& layer) { return kaf_zeros(layer.config); }

inline KafLayer kaf_init(const KafConfig& cfg, Rng& rng) {
  validate_kaf_config(cfg);
  KafLayer layer = kaf_zeros(cfg);
  for (auto& w : layer.w_freq.values())
    w = cfg.rff_init == RffInit::Gaussian ? cfg.sigma_f * rng.normal() : rng.uniform(-1.0, 1.0);
  for (auto& t : layer.theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (auto& x : layer.v.values()) x = 0.1 * rng.normal();  // variance 0.01
  layer.a.assign(cfg.d_in, 1.0);
  layer.b.assign(cfg.d_in, 1e-2);
  const double limit = std::sqrt(6.0 / static_cast<double>(cfg.d_in + cfg.d_out));
  for (auto& w : layer.w_out.values()) w = rng.uniform(-limit, limit);
  return layer;
}

inline KafLayer kaf_init(std::size_t d_in, std::size_t d_out, std::size_t num_grids, double sigma_f, Rng& rng) {
  KafConfig cfg;
  cfg.d_in = d_in;
  cfg.d_out = d_out;
  cfg.num_grids = num_grids;
  cfg.sigma_f = sigma_f;
  return kaf_init(cfg, rng);
}

inline std::vector<TensorRef> tensors(KafLayer& l) {
  return {tensor_ref("W_freq", l.w_freq), tensor_ref("theta", l.theta), tensor_ref("V", l.v),
          tensor_ref("a", l.a),           tensor_ref("b", l.b),         tensor_ref("W_out", l.w_out),
          tensor_ref("c", l.c)};
}

/// Per-dimension Fourier basis of an (already normalized) input row, d_in x 2M.
inline Matrix kaf_basis(const KafLayer& layer, std::span<const double> x_row) {
  const std::size_t d = layer.d_in(), m = layer.num_grids();
  if (x_row.size() != d) throw ShapeError("kaf_basis: expected " + std::to_string(d) + " inputs");
  const double norm = std::sqrt(1.0 / static_cast<double>(m));
  Matrix basis(d, 2 * m);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = layer.w_freq(i, j) * x_row[i] + layer.theta[j];
      basis(i, j) = norm * std::cos(p);
      basis(i, m + j) = norm * std::sin(p);
    }
  }
  return basis;
}

/// Intermediates of one forward pass.
struct KafCache {
  Matrix input;                  // n x d_in
  Matrix normed;                 // n x d_in, equals input without layernorm
  std::vector<double> inv_std;   // n, layernorm only
  Matrix cos_p;                  // n x (d_in*M), unnormalized cos of the phase
  Matrix sin_p;                  // n x (d_in*M)
  Matrix phi;                    // n x d_in
  Matrix hybrid;                 // n x d_in, a*GELU + b*phi
};

inline Matrix kaf_forward(const KafLayer& layer, const Matrix& x, KafCache* cache) {
  const auto& cfg = layer.config;
  const std::size_t d = cfg.d_in, m = cfg.num_grids, n = x.rows();
  if (x.cols() != d) throw ShapeError("kaf_forward: input " + x.shape() + " but layer d_in=" + std::to_string(d));

  Matrix normed = x;
  std::vector<double> inv_std;
  if (cfg.use_layernorm) {
    inv_std.resize(n);
    for (std::size_t r = 0; r < n; ++r) inv_std[r] = layernorm_into(x.row(r), normed.row(r));
  }

  const bool rff = !cfg.disable_rff_path;
  const double norm = std::sqrt(1.0 / static_cast<double>(m));
  Matrix cos_p, sin_p;
  if (rff && cache) {
    cos_p = Matrix(n, d * m);
    sin_p = Matrix(n, d * m);
  }
  Matrix phi(n, d), hybrid(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double t = normed(r, i);
      double f = 0.0;
      if (rff) {
        const double* wf = layer.w_freq.row(i).data();
        const double* vi = layer.v.row(i).data();
        for (std::size_t j = 0; j < m; ++j) {
          const double p = wf[j] * t + layer.theta[j];
          const double cp = std::cos(p), sp = std::sin(p);
          f += vi[j] * cp + vi[m + j] * sp;
          if (cache) {
            cos_p(r, i * m + j) = cp;
            sin_p(r, i * m + j) = sp;
          }
        }
        f *= norm;
      }
      phi(r, i) = f;
      double u = 0.0;
      if (!cfg.disable_gelu_path) u += layer.scale_a(i) * gelu(t);
      if (rff) u += layer.scale_b(i) * f;
      hybrid(r, i) = u;
    }
  }

  Matrix out(n, cfg.d_out);
  for (std::size_t r = 0; r < n; ++r) {
    const double* u = hybrid.row(r).data();
    for (std::size_t q = 0; q < cfg.d_out; ++q) {
      const double* w = layer.w_out.row(q).data();
      double s = layer.c[q];
      for (std::size_t i = 0; i < d; ++i) s += w[i] * u[i];
      out(r, q) = s;
    }
  }

  if (cache) {
    cache->input = x;
    cache->normed = std::move(normed);
    cache->inv_std = std::move(inv_std);
    cache->cos_p = std::move(cos_p);
    cache->sin_p = std::move(sin_p);
    cache->phi = std::move(phi);
    cache->hybrid = std::move(hybrid);
  }
  return out;
}

inline std::pair<Matrix, KafCache> kaf_forward(const KafLayer& layer, const Matrix& x) {
  KafCache cache;
  Matrix out = kaf_forward(layer, x, &cache);
  return {std::move(out), std::move(cache)};
}

struct BackwardOptions {
  /// When set, the W_freq gradient is rescaled so its Frobenius norm is at most this.
  std::optional<double> clip_tau;
};

template <class Layer>
struct LayerGradients {
  Layer params;  // same shapes as the layer
  Matrix d_input;
};

inline LayerGradients<KafLayer> kaf_backward(const KafLayer& layer, const KafCache& cache, const Matrix& d_out,
                                             const BackwardOptions& opts = {}) {
  const auto& cfg = layer.config;
  const std::size_t d = cfg.d_in, m = cfg.num_grids, n = d_out.rows();
  const bool rff = !cfg.disable_rff_path;
  if (d_out.cols() != cfg.d_out || cache.input.rows() != n || cache.input.cols() != d ||
      cache.hybrid.rows() != n || cache.hybrid.cols() != d ||
      (rff && (cache.cos_p.rows() != n || cache.cos_p.cols() != d * m)) ||
      (cfg.use_layernorm && cache.inv_std.size() != n)) {
    throw ContractError("kaf_backward: cache does not belong to this layer/gradient (d_out " + d_out.shape() +
                        ", cached input " + cache.input.shape() + ")");
  }

  LayerGradients<KafLayer> g{kaf_zeros_like(layer), Matrix(n, d)};
  auto& gp = g.params;
  const double norm = std::sqrt(1.0 / static_cast<double>(m));
  std::vector<double> du(d), dnormed(d);

  for (std::size_t r = 0; r < n; ++r) {
    const double* dh = d_out.row(r).data();
    const double* u = cache.hybrid.row(r).data();
    for (std::size_t q = 0; q < cfg.d_out; ++q) {
      gp.c[q] += dh[q];
      double* gw = gp.w_out.row(q).data();
      for (std::size_t i = 0; i < d; ++i) gw[i] += dh[q] * u[i];
    }
    std::fill(du.begin(), du.end(), 0.0);
    for (std::size_t q = 0; q < cfg.d_out; ++q) {
      const double* w = layer.w_out.row(q).data();
      for (std::size_t i = 0; i < d; ++i) du[i] += dh[q] * w[i];
    }

    for (std::size_t i = 0; i < d; ++i) {
      const double t = cache.normed(r, i);
      double dt = 0.0;
      if (!cfg.disable_gelu_path) {
        if (!cfg.disable_scales) gp.a[i] += du[i] * gelu(t);
        dt += du[i] * layer.scale_a(i) * gelu_grad(t);
      }
      if (rff) {
        if (!cfg.disable_scales) gp.b[i] += du[i] * cache.phi(r, i);
        const double dphi = du[i] * layer.scale_b(i) * norm;
        const double* cp = cache.cos_p.row(r).data() + i * m;
        const double* sp = cache.sin_p.row(r).data() + i * m;
        const double* vi = layer.v.row(i).data();
        double* gv = gp.v.row(i).data();
        double* gw = gp.w_freq.row(i).data();
        for (std::size_t j = 0; j < m; ++j) {
          gv[j] += dphi * cp[j];
          gv[m + j] += dphi * sp[j];
          // d/dp of (V_c cos p + V_s sin p)
          const double dp = dphi * (vi[m + j] * cp[j] - vi[j] * sp[j]);
          gw[j] += dp * t;
          gp.theta[j] += dp;
          dt += dp * layer.w_freq(i, j);
        }
      }
      dnormed[i] = dt;
    }

    auto dx = g.d_input.row(r);
    if (cfg.use_layernorm) {
      layernorm_backward(cache.normed.row(r), cache.inv_std[r], dnormed, dx);
    } else {
      std::copy(dnormed.begin(), dnormed.end(), dx.begin());
    }
  }

  if (opts.clip_tau) {
    const double nrm = frobenius_norm(gp.w_freq.values());
    if (nrm > *opts.clip_tau && nrm > 0.0) {
      const double s = *opts.clip_tau / nrm;
      for (auto& v : gp.w_freq.values()) v *= s;
    }
  }
  return g;
}

/// Inference form: h = W_gelu GELU(x~) + W_fourier vec(psi(x~)) + c, where
/// vec stacks the d_in basis rows of length 2M.
struct FoldedKaf {
  KafConfig config;
  Matrix w_freq;
  std::vector<double> theta;
  Matrix w_gelu;     // d_out x d_in
  Matrix w_fourier;  // d_out x (d_in * 2M)
  std::vector<double> c;

  std::size_t parameter_count() const { return w_gelu.size() + w_fourier.size() + c.size(); }
};

inline FoldedKaf kaf_fold_inference(const KafLayer& layer) {
  const auto& cfg = layer.config;
  const std::size_t d = cfg.d_in, m2 = 2 * cfg.num_grids;
  FoldedKaf f{cfg, layer.w_freq, layer.theta, Matrix(cfg.d_out, d), Matrix(cfg.d_out, d * m2), layer.c};
  for (std::size_t q = 0; q < cfg.d_out; ++q) {
    for (std::size_t i = 0; i < d; ++i) {
      const double w = layer.w_out(q, i);
      if (!cfg.disable_gelu_path) f.w_gelu(q, i) = w * layer.scale_a(i);
      if (!cfg.disable_rff_path) {
        const double wb = w * layer.scale_b(i);
        for (std::size_t j = 0; j < m2; ++j) f.w_fourier(q, i * m2 + j) = wb * layer.v(i, j);
      }
    }
  }
  return f;
}

inline Matrix folded_forward(const FoldedKaf& f, const Matrix& x) {
  const auto& cfg = f.config;
  const std::size_t d = cfg.d_in, m = cfg.num_grids;
  if (x.cols() != d) throw ShapeError("folded_forward: input " + x.shape());
  const double norm = std::sqrt(1.0 / static_cast<double>(m));
  Matrix g(x.rows(), d), psi(x.rows(), d * 2 * m);
  std::vector<double> t(d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (cfg.use_layernorm) {
      layernorm_into(x.row(r), t);
    } else {
      std::copy(x.row(r).begin(), x.row(r).end(), t.begin());
    }
    for (std::size_t i = 0; i < d; ++i) {
      g(r, i) = gelu(t[i]);
      for (std::size_t j = 0; j < m; ++j) {
        const double p = f.w_freq(i, j) * t[i] + f.theta[j];
        psi(r, i * 2 * m + j) = norm * std::cos(p);
        psi(r, i * 2 * m + m + j) = norm * std::sin(p);
      }
    }
  }
  Matrix out = matmul(g, f.w_gelu.transposed());
  const Matrix fourier = matmul(psi, f.w_fourier.transposed());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t q = 0; q < out.cols(); ++q) out(r, q) += fourier(r, q) + f.c[q];
  return out;
}

}  // namespace kaf
