#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/tensor_ref.hpp"

namespace kaf {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update. Moments are allocated on first use.
inline void adam_step(AdamState& s, const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads) {
  if (params.size() != grads.size()) throw ContractError("adam_step: parameter/gradient tensor count differs");
  if (s.m.empty()) {
    s.m.resize(params.size());
    s.v.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      s.m[k].assign(params[k].values.size(), 0.0);
      s.v[k].assign(params[k].values.size(), 0.0);
    }
  }
  if (s.m.size() != params.size()) throw ContractError("adam_step: state was built for a different model");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size() || s.m[k].size() != params[k].values.size())
      throw ContractError("adam_step: shape mismatch for tensor " + params[k].name);
  }

  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].values;
    auto g = grads[k].values;
    auto& m = s.m[k];
    auto& v = s.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

}  // namespace kaf
