#pragma once

#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/kaf_layer.hpp"
#include "kaf/kan_layer.hpp"
#include "kaf/matrix.hpp"
#include "kaf/mlp_layer.hpp"
#include "kaf/rng.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

using Layer = std::variant<KafLayer, KanLayer, MlpLayer>;
using LayerCache = std::variant<KafCache, KanCache, MlpCache>;

enum class ModelKind { Kaf, Kan, Mlp };

/// Feed-forward stack of layers.
struct Network {
  std::vector<Layer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
};

inline std::size_t layer_d_in(const Layer& l) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MlpLayer>) return x.d_in();
        else return x.config.d_in;
      },
      l);
}

inline std::size_t layer_d_out(const Layer& l) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MlpLayer>) return x.d_out();
        else return x.config.d_out;
      },
      l);
}

inline std::size_t Network::input_dim() const { return layers.empty() ? 0 : layer_d_in(layers.front()); }
inline std::size_t Network::output_dim() const { return layers.empty() ? 0 : layer_d_out(layers.back()); }

inline std::vector<TensorRef> tensors(Layer& l) {
  return std::visit([](auto& x) { return tensors(x); }, l);
}

/// All parameter tensors, named "layer<i>.<tensor>".
inline std::vector<TensorRef> tensors(Network& net) {
  std::vector<TensorRef> out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    for (auto& t : tensors(net.layers[i])) {
      t.name = "layer" + std::to_string(i) + "." + t.name;
      out.push_back(std::move(t));
    }
  }
  return out;
}

inline std::size_t parameter_count(const Network& net) {
  auto copy = net;
  return total_size(tensors(copy));
}

inline Layer zeros_like(const Layer& l) {
  return std::visit(
      [](const auto& x) -> Layer {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, KafLayer>) return kaf_zeros_like(x);
        else if constexpr (std::is_same_v<T, KanLayer>) return kan_zeros_like(x);
        else return mlp_zeros_like(x);
      },
      l);
}

struct NetworkCache {
  std::vector<LayerCache> layers;
};

struct NetworkGradients {
  Network params;  // same structure as the network
  Matrix d_input;
};

inline Matrix layer_forward(const Layer& l, const Matrix& x, LayerCache* cache) {
  return std::visit(
      [&](const auto& layer) -> Matrix {
        using T = std::decay_t<decltype(layer)>;
        if constexpr (std::is_same_v<T, KafLayer>) {
          if (!cache) return kaf_forward(layer, x, nullptr);
          KafCache c;
          Matrix out = kaf_forward(layer, x, &c);
          *cache = std::move(c);
          return out;
        } else if constexpr (std::is_same_v<T, KanLayer>) {
          if (!cache) return kan_forward(layer, x, nullptr);
          KanCache c;
          Matrix out = kan_forward(layer, x, &c);
          *cache = std::move(c);
          return out;
        } else {
          if (!cache) return mlp_forward(layer, x, nullptr);
          MlpCache c;
          Matrix out = mlp_forward(layer, x, &c);
          *cache = std::move(c);
          return out;
        }
      },
      l);
}

/// Inference without caching.
inline Matrix predict(const Network& net, const Matrix& x) {
  if (net.layers.empty()) throw ParameterError("predict: empty network");
  if (x.cols() != net.input_dim())
    throw ShapeError("predict: input " + x.shape() + " but network input dim " + std::to_string(net.input_dim()));
  Matrix h = x;
  for (const auto& l : net.layers) h = layer_forward(l, h, nullptr);
  return h;
}

inline Matrix forward(const Network& net, const Matrix& x, NetworkCache& cache) {
  if (net.layers.empty()) throw ParameterError("forward: empty network");
  cache.layers.assign(net.layers.size(), LayerCache{});
  Matrix h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) h = layer_forward(net.layers[i], h, &cache.layers[i]);
  return h;
}

inline NetworkGradients backward(const Network& net, const NetworkCache& cache, const Matrix& d_out,
                                 const BackwardOptions& opts = {}) {
  if (cache.layers.size() != net.layers.size()) throw ContractError("backward: cache has wrong layer count");
  NetworkGradients g;
  g.params.layers.resize(net.layers.size(), MlpLayer{});
  Matrix grad = d_out;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const auto& layer = net.layers[i];
    const auto& lc = cache.layers[i];
    if (const auto* k = std::get_if<KafLayer>(&layer)) {
      const auto* c = std::get_if<KafCache>(&lc);
      if (!c) throw ContractError("backward: cache kind mismatch at layer " + std::to_string(i));
      auto lg = kaf_backward(*k, *c, grad, opts);
      g.params.layers[i] = std::move(lg.params);
      grad = std::move(lg.d_input);
    } else if (const auto* k2 = std::get_if<KanLayer>(&layer)) {
      const auto* c = std::get_if<KanCache>(&lc);
      if (!c) throw ContractError("backward: cache kind mismatch at layer " + std::to_string(i));
      auto lg = kan_backward(*k2, *c, grad);
      g.params.layers[i] = std::move(lg.params);
      grad = std::move(lg.d_input);
    } else {
      const auto& m = std::get<MlpLayer>(layer);
      const auto* c = std::get_if<MlpCache>(&lc);
      if (!c) throw ContractError("backward: cache kind mismatch at layer " + std::to_string(i));
      auto lg = mlp_backward(m, *c, grad);
      g.params.layers[i] = std::move(lg.params);
      grad = std::move(lg.d_input);
    }
  }
  g.d_input = std::move(grad);
  return g;
}

inline void require_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ParameterError("network needs at least input and output dims");
  for (auto d : dims)
    if (d < 1) throw ParameterError("network dims must be >= 1");
}

/// Stack of KAF layers; `base` supplies everything except d_in/d_out.
inline Network make_kaf_network(const std::vector<std::size_t>& dims, const KafConfig& base, Rng& rng) {
  require_dims(dims);
  Network net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    KafConfig cfg = base;
    cfg.d_in = dims[i];
    cfg.d_out = dims[i + 1];
    cfg.use_layernorm = base.use_layernorm && cfg.d_in >= 2;
    net.layers.emplace_back(kaf_init(cfg, rng));
  }
  return net;
}

inline Network make_kan_network(const std::vector<std::size_t>& dims, const KanConfig& base, Rng& rng) {
  require_dims(dims);
  Network net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    KanConfig cfg = base;
    cfg.d_in = dims[i];
    cfg.d_out = dims[i + 1];
    net.layers.emplace_back(kan_init(cfg, rng));
  }
  return net;
}

/// Hidden layers use `act`; the output layer is linear.
inline Network make_mlp_network(const std::vector<std::size_t>& dims, Activation act, Rng& rng) {
  require_dims(dims);
  Network net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    net.layers.emplace_back(mlp_init(dims[i], dims[i + 1], last ? Activation::Identity : act, rng));
  }
  return net;
}

/// Mean |a| and mean |b| over every KAF layer; zero when there is none.
struct ScaleSummary {
  double mean_abs_a = 0.0;
  double mean_abs_b = 0.0;
};

inline ScaleSummary scale_summary(const Network& net) {
  ScaleSummary s;
  std::size_t n = 0;
  for (const auto& l : net.layers) {
    if (const auto* k = std::get_if<KafLayer>(&l)) {
      for (std::size_t i = 0; i < k->d_in(); ++i) {
        s.mean_abs_a += std::fabs(k->scale_a(i));
        s.mean_abs_b += std::fabs(k->scale_b(i));
      }
      n += k->d_in();
    }
  }
  if (n) {
    s.mean_abs_a /= static_cast<double>(n);
    s.mean_abs_b /= static_cast<double>(n);
  }
  return s;
}

}  // namespace kaf
