#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/kaf_layer.hpp"
#include "kaf/matrix.hpp"
#include "kaf/rng.hpp"
#include "kaf/special.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

enum class Activation { GELU, ReLU, Identity };

inline double activate(Activation act, double x) noexcept {
  switch (act) {
    case Activation::GELU: return gelu(x);
    case Activation::ReLU: return relu(x);
    case Activation::Identity: return x;
  }
  return x;
}

inline double activate_grad(Activation act, double x) noexcept {
  switch (act) {
    case Activation::GELU: return gelu_grad(x);
    case Activation::ReLU: return relu_grad(x);
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

/// Affine map followed by an elementwise activation.
struct MlpLayer {
  Matrix w;                  // d_out x d_in
  std::vector<double> bias;  // d_out
  Activation activation = Activation::GELU;

  std::size_t d_in() const noexcept { return w.cols(); }
  std::size_t d_out() const noexcept { return w.rows(); }
};

inline MlpLayer mlp_zeros(std::size_t d_in, std::size_t d_out, Activation act) {
  if (d_in < 1 || d_out < 1) throw ParameterError("mlp layer: d_in and d_out must be >= 1");
  return {Matrix(d_out, d_in), std::vector<double>(d_out, 0.0), act};
}

inline MlpLayer mlp_zeros_like(const MlpLayer& l) { return mlp_zeros(l.d_in(), l.d_out(), l.activation); }

/// Xavier-uniform weights, zero bias.
inline MlpLayer mlp_init(std::size_t d_in, std::size_t d_out, Activation act, Rng& rng) {
  MlpLayer l = mlp_zeros(d_in, d_out, act);
  const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
  for (auto& w : l.w.values()) w = rng.uniform(-limit, limit);
  return l;
}

inline std::vector<TensorRef> tensors(MlpLayer& l) { return {tensor_ref("W", l.w), tensor_ref("bias", l.bias)}; }

struct MlpCache {
  Matrix input;
  Matrix pre;  // pre-activation
};

inline Matrix mlp_forward(const MlpLayer& layer, const Matrix& x, MlpCache* cache) {
  if (x.cols() != layer.d_in())
    throw ShapeError("mlp_forward: input " + x.shape() + " but layer d_in=" + std::to_string(layer.d_in()));
  Matrix pre(x.rows(), layer.d_out());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.row(r).data();
    for (std::size_t q = 0; q < layer.d_out(); ++q) {
      const double* w = layer.w.row(q).data();
      double s = layer.bias[q];
      for (std::size_t i = 0; i < layer.d_in(); ++i) s += w[i] * xr[i];
      pre(r, q) = s;
    }
  }
  Matrix out = pre;
  if (layer.activation != Activation::Identity)
    for (auto& v : out.values()) v = activate(layer.activation, v);
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
  }
  return out;
}

inline std::pair<Matrix, MlpCache> mlp_forward(const MlpLayer& layer, const Matrix& x) {
  MlpCache cache;
  Matrix out = mlp_forward(layer, x, &cache);
  return {std::move(out), std::move(cache)};
}

inline LayerGradients<MlpLayer> mlp_backward(const MlpLayer& layer, const MlpCache& cache, const Matrix& d_out) {
  const std::size_t n = d_out.rows();
  if (d_out.cols() != layer.d_out() || cache.pre.rows() != n || cache.pre.cols() != layer.d_out() ||
      cache.input.cols() != layer.d_in()) {
    throw ContractError("mlp_backward: cache does not belong to this layer/gradient");
  }
  LayerGradients<MlpLayer> g{mlp_zeros_like(layer), Matrix(n, layer.d_in())};
  std::vector<double> dz(layer.d_out());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t q = 0; q < layer.d_out(); ++q) dz[q] = d_out(r, q) * activate_grad(layer.activation, cache.pre(r, q));
    const double* xr = cache.input.row(r).data();
    double* dx = g.d_input.row(r).data();
    for (std::size_t q = 0; q < layer.d_out(); ++q) {
      g.params.bias[q] += dz[q];
      double* gw = g.params.w.row(q).data();
      const double* w = layer.w.row(q).data();
      for (std::size_t i = 0; i < layer.d_in(); ++i) {
        gw[i] += dz[q] * xr[i];
        dx[i] += dz[q] * w[i];
      }
    }
  }
  return g;
}

}  // namespace kaf
