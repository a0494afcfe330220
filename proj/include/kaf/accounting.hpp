#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "kaf/network.hpp"
#include "kaf/rng.hpp"

namespace kaf {

struct LayerDims {
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::size_t grid = 5;       // G (KAN)
  std::size_t order = 3;      // K (KAN)
  std::size_t num_grids = 9;  // M (KAF)
};

struct CountReport {
  ModelKind kind = ModelKind::Kaf;
  LayerDims dims;
  std::uint64_t params_formula = 0;
  std::uint64_t params_actual = 0;
  std::uint64_t flops_formula = 0;
};

inline std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Kaf: return "kaf";
    case ModelKind::Kan: return "kan";
    case ModelKind::Mlp: return "mlp";
  }
  return "?";
}

inline void require_positive(const LayerDims& d, ModelKind kind) {
  if (d.d_in < 1 || d.d_out < 1) throw ParameterError("accounting: d_in and d_out must be >= 1");
  if (kind == ModelKind::Kan && (d.grid < 1 || d.order < 1)) throw ParameterError("accounting: G and K must be >= 1");
  if (kind == ModelKind::Kaf && d.num_grids < 1) throw ParameterError("accounting: M must be >= 1");
}

/// Closed-form single-layer parameter counts. The KAF form leaves out V.
///   KAN: d_in d_out (G + K + 3) + d_out
///   KAF: d_in M + M + 2 d_in + d_in d_out + d_out
///   MLP: d_in d_out + d_out
inline std::uint64_t params_formula(ModelKind kind, const LayerDims& d) {
  require_positive(d, kind);
  const std::uint64_t i = d.d_in, o = d.d_out;
  switch (kind) {
    case ModelKind::Kan: return i * o * (d.grid + d.order + 3) + o;
    case ModelKind::Kaf: return i * d.num_grids + d.num_grids + 2 * i + i * o + o;
    case ModelKind::Mlp: return i * o + o;
  }
  return 0;
}

/// Closed-form single-layer FLOPs.
///   KAN: 7 d_in + d_in d_out [9K (G + 1.5K) + 2G - 2.5K + 3]
///   KAF: 4 d_in M + 2 d_in + 2 d_in d_out + 5 d_in
///   MLP (GELU): 2 d_in d_out + 5 d_out
/// The KAN bracket equals 9KG + K(27K - 5)/2 + 2G + 3, an integer for every K.
inline std::uint64_t count_flops(ModelKind kind, const LayerDims& d) {
  require_positive(d, kind);
  const std::uint64_t i = d.d_in, o = d.d_out, g = d.grid, k = d.order, m = d.num_grids;
  switch (kind) {
    case ModelKind::Kan: return 7 * i + i * o * (9 * k * g + k * (27 * k - 5) / 2 + 2 * g + 3);
    case ModelKind::Kaf: return 4 * i * m + 2 * i + 2 * i * o + 5 * i;
    case ModelKind::Mlp: return 2 * i * o + 5 * o;
  }
  return 0;
}

/// Parameter count of a freshly constructed layer, by enumerating its tensors.
inline std::uint64_t params_actual(ModelKind kind, const LayerDims& d) {
  require_positive(d, kind);
  Rng rng(0);
  Layer layer = MlpLayer{};
  switch (kind) {
    case ModelKind::Kan: {
      KanConfig c;
      c.d_in = d.d_in;
      c.d_out = d.d_out;
      c.grid = d.grid;
      c.order = d.order;
      layer = kan_init(c, rng);
      break;
    }
    case ModelKind::Kaf: layer = kaf_init(d.d_in, d.d_out, d.num_grids, 1.64, rng); break;
    case ModelKind::Mlp: layer = mlp_init(d.d_in, d.d_out, Activation::GELU, rng); break;
  }
  return total_size(tensors(layer));
}

inline CountReport count_params(ModelKind kind, const LayerDims& d) {
  return {kind, d, params_formula(kind, d), params_actual(kind, d), count_flops(kind, d)};
}

}  // namespace kaf
