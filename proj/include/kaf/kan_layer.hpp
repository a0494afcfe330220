#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kaf/bspline.hpp"
#include "kaf/error.hpp"
#include "kaf/kaf_layer.hpp"
#include "kaf/matrix.hpp"
#include "kaf/rng.hpp"
#include "kaf/special.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

struct KanConfig {
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::size_t grid = 5;   // G, segments
  std::size_t order = 3;  // K, polynomial degree
  double lo = -1.0;
  double hi = 1.0;

  std::size_t basis_count() const noexcept { return grid + order; }
};

/// B-spline KAN layer: out_q = sum_p w_h[q,p] silu(x_p) + w_s[q,p] sum_i c[p,q,i] B_i(x_p).
struct KanLayer {
  KanConfig config;
  std::vector<double> knots;
  Matrix coeffs;  // (d_in * d_out) x B, row p * d_out + q
  Matrix w_h;     // d_out x d_in
  Matrix w_s;     // d_out x d_in

  std::size_t coeff_row(std::size_t p, std::size_t q) const noexcept { return p * config.d_out + q; }
};

inline KanLayer kan_zeros(const KanConfig& cfg) {
  if (cfg.d_in < 1 || cfg.d_out < 1) throw ParameterError("kan layer: d_in and d_out must be >= 1");
  if (cfg.grid < 1 || cfg.order < 1) throw ParameterError("kan layer: grid and order must be >= 1");
  KanLayer l;
  l.config = cfg;
  l.knots = open_uniform_knots(cfg.grid, cfg.order, cfg.lo, cfg.hi);
  l.coeffs = Matrix(cfg.d_in * cfg.d_out, cfg.basis_count());
  l.w_h = Matrix(cfg.d_out, cfg.d_in);
  l.w_s = Matrix(cfg.d_out, cfg.d_in);
  return l;
}

inline KanLayer kan_zeros_like(const KanLayer& l) { return kan_zeros(l.config); }

inline KanLayer kan_init(const KanConfig& cfg, Rng& rng) {
  KanLayer l = kan_zeros(cfg);
  for (auto& c : l.coeffs.values()) c = 0.1 * rng.normal();
  const double limit = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));
  for (auto& w : l.w_h.values()) w = rng.uniform(-limit, limit);
  l.w_s.fill(1.0);
  return l;
}

inline std::vector<TensorRef> tensors(KanLayer& l) {
  return {tensor_ref("coeffs", l.coeffs), tensor_ref("w_h", l.w_h), tensor_ref("w_s", l.w_s)};
}

struct KanCache {
  Matrix input;   // n x d_in
  Matrix basis;   // (n * d_in) x B
  Matrix dbasis;  // (n * d_in) x B
};

inline Matrix kan_forward(const KanLayer& layer, const Matrix& x, KanCache* cache) {
  const auto& cfg = layer.config;
  const std::size_t n = x.rows(), nb = cfg.basis_count();
  if (x.cols() != cfg.d_in)
    throw ShapeError("kan_forward: input " + x.shape() + " but layer d_in=" + std::to_string(cfg.d_in));
  Matrix basis(n * cfg.d_in, nb), dbasis(n * cfg.d_in, nb);
  std::vector<double> bv, dv;
  Matrix out(n, cfg.d_out);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < cfg.d_in; ++p) {
      const double xp = x(r, p);
      bspline_basis_and_derivative(xp, layer.knots, cfg.order, bv, dv);
      std::copy(bv.begin(), bv.end(), basis.row(r * cfg.d_in + p).begin());
      std::copy(dv.begin(), dv.end(), dbasis.row(r * cfg.d_in + p).begin());
      const double s = silu(xp);
      for (std::size_t q = 0; q < cfg.d_out; ++q) {
        const double* c = layer.coeffs.row(layer.coeff_row(p, q)).data();
        double spline = 0.0;
        for (std::size_t i = 0; i < nb; ++i) spline += c[i] * bv[i];
        out(r, q) += layer.w_h(q, p) * s + layer.w_s(q, p) * spline;
      }
    }
  }
  if (cache) {
    cache->input = x;
    cache->basis = std::move(basis);
    cache->dbasis = std::move(dbasis);
  }
  return out;
}

inline std::pair<Matrix, KanCache> kan_forward(const KanLayer& layer, const Matrix& x) {
  KanCache cache;
  Matrix out = kan_forward(layer, x, &cache);
  return {std::move(out), std::move(cache)};
}

inline LayerGradients<KanLayer> kan_backward(const KanLayer& layer, const KanCache& cache, const Matrix& d_out) {
  const auto& cfg = layer.config;
  const std::size_t n = d_out.rows(), nb = cfg.basis_count();
  if (d_out.cols() != cfg.d_out || cache.input.rows() != n || cache.input.cols() != cfg.d_in ||
      cache.basis.rows() != n * cfg.d_in || cache.basis.cols() != nb) {
    throw ContractError("kan_backward: cache does not belong to this layer/gradient");
  }
  LayerGradients<KanLayer> g{kan_zeros_like(layer), Matrix(n, cfg.d_in)};
  auto& gp = g.params;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < cfg.d_in; ++p) {
      const double xp = cache.input(r, p);
      const double s = silu(xp), ds = silu_grad(xp);
      const double* bv = cache.basis.row(r * cfg.d_in + p).data();
      const double* dv = cache.dbasis.row(r * cfg.d_in + p).data();
      double dx = 0.0;
      for (std::size_t q = 0; q < cfg.d_out; ++q) {
        const double go = d_out(r, q);
        const double* c = layer.coeffs.row(layer.coeff_row(p, q)).data();
        double* gc = gp.coeffs.row(layer.coeff_row(p, q)).data();
        double spline = 0.0, dspline = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
          spline += c[i] * bv[i];
          dspline += c[i] * dv[i];
        }
        const double ws = layer.w_s(q, p);
        gp.w_h(q, p) += go * s;
        gp.w_s(q, p) += go * spline;
        for (std::size_t i = 0; i < nb; ++i) gc[i] += go * ws * bv[i];
        dx += go * (layer.w_h(q, p) * ds + ws * dspline);
      }
      g.d_input(r, p) = dx;
    }
  }
  return g;
}

/// Least-squares fit of one spline's coefficients to samples (x_k, y_k) via the
/// normal equations with partial pivoting.
inline std::vector<double> fit_spline_coefficients(const std::vector<double>& knots, std::size_t order,
                                                   const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ShapeError("fit_spline_coefficients: sample count mismatch");
  const std::size_t nb = knots.size() - order - 1;
  Matrix ata(nb, nb);
  std::vector<double> aty(nb, 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto bv = bspline_basis(xs[k], knots, order);
    for (std::size_t i = 0; i < nb; ++i) {
      aty[i] += bv[i] * ys[k];
      for (std::size_t j = 0; j < nb; ++j) ata(i, j) += bv[i] * bv[j];
    }
  }
  for (std::size_t col = 0; col < nb; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < nb; ++r)
      if (std::fabs(ata(r, col)) > std::fabs(ata(piv, col))) piv = r;
    if (std::fabs(ata(piv, col)) < 1e-300) throw ParameterError("fit_spline_coefficients: singular system");
    if (piv != col) {
      for (std::size_t j = 0; j < nb; ++j) std::swap(ata(col, j), ata(piv, j));
      std::swap(aty[col], aty[piv]);
    }
    for (std::size_t r = col + 1; r < nb; ++r) {
      const double f = ata(r, col) / ata(col, col);
      for (std::size_t j = col; j < nb; ++j) ata(r, j) -= f * ata(col, j);
      aty[r] -= f * aty[col];
    }
  }
  std::vector<double> sol(nb);
  for (std::size_t i = nb; i-- > 0;) {
    double s = aty[i];
    for (std::size_t j = i + 1; j < nb; ++j) s -= ata(i, j) * sol[j];
    sol[i] = s / ata(i, i);
  }
  return sol;
}

}  // namespace kaf
