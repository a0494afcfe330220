#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "kaf/error.hpp"
#include "kaf/matrix.hpp"

namespace kaf {

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d prediction
};

/// Mean over every entry of (pred - target)^2.
inline LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("mse_loss: prediction " + pred.shape() + " vs target " + target.shape());
  LossResult r{0.0, Matrix(pred.rows(), pred.cols())};
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    r.loss += d * d;
    r.grad.values()[i] = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

/// Softmax cross-entropy averaged over rows. `labels` is n x 1 with integer classes.
inline LossResult cross_entropy_loss(const Matrix& logits, const Matrix& labels) {
  if (labels.rows() != logits.rows() || labels.cols() != 1)
    throw ShapeError("cross_entropy_loss: labels " + labels.shape() + " for logits " + logits.shape());
  const std::size_t n = logits.rows(), k = logits.cols();
  LossResult r{0.0, Matrix(n, k)};
  for (std::size_t i = 0; i < n; ++i) {
    const double lab = labels(i, 0);
    if (!(lab >= 0.0) || lab >= static_cast<double>(k) || lab != std::floor(lab))
      throw DataError("cross_entropy_loss: label " + std::to_string(lab) + " out of range [0, " + std::to_string(k) + ")");
    const auto y = static_cast<std::size_t>(lab);
    double mx = logits(i, 0);
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, logits(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(logits(i, j) - mx);
    const double lse = mx + std::log(z);
    r.loss += lse - logits(i, y);
    for (std::size_t j = 0; j < k; ++j) r.grad(i, j) = std::exp(logits(i, j) - lse) / static_cast<double>(n);
    r.grad(i, y) -= 1.0 / static_cast<double>(n);
  }
  r.loss /= static_cast<double>(n);
  return r;
}

}  // namespace kaf
