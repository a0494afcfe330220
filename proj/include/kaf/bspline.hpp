#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "kaf/error.hpp"

namespace kaf {

/// Clamped (open) uniform knot vector: K+1 copies of each end, G-1 interior knots.
/// Yields G+K basis functions of degree K.
inline std::vector<double> open_uniform_knots(std::size_t segments, std::size_t order, double lo, double hi) {
  if (segments < 1) throw ParameterError("open_uniform_knots: need at least one segment");
  if (!(hi > lo)) throw ParameterError("open_uniform_knots: empty grid range");
  std::vector<double> knots;
  knots.reserve(segments + 2 * order + 1);
  for (std::size_t i = 0; i < order; ++i) knots.push_back(lo);
  for (std::size_t i = 0; i <= segments; ++i)
    knots.push_back(i == segments ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(segments));
  for (std::size_t i = 0; i < order; ++i) knots.push_back(hi);
  return knots;
}

namespace detail {

inline double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

/// Degree-0 through degree-`order` Cox-de Boor table for x already clamped into
/// [knots[order], knots[end-order-1]]. Returns the degree-`order` row in `basis`
/// and the degree-(order-1) row in `lower` (when order >= 1).
inline void cox_de_boor(double x, std::span<const double> knots, std::size_t order, std::vector<double>& basis,
                        std::vector<double>& lower) {
  const std::size_t nk = knots.size();
  const std::size_t n0 = nk - 1;  // degree-0 functions
  std::vector<double> cur(n0, 0.0);
  const double right = knots[nk - 1 - order];
  // Half-open intervals, with the right boundary assigned to the last nonempty one.
  std::size_t span_idx = n0;
  if (x >= right) {
    for (std::size_t i = n0; i-- > 0;)
      if (knots[i] < knots[i + 1]) {
        span_idx = i;
        break;
      }
  } else {
    for (std::size_t i = 0; i < n0; ++i)
      if (knots[i] <= x && x < knots[i + 1]) {
        span_idx = i;
        break;
      }
  }
  if (span_idx < n0) cur[span_idx] = 1.0;

  lower.clear();
  for (std::size_t k = 1; k <= order; ++k) {
    if (k == order) lower = cur;
    const std::size_t nb = n0 - k;
    std::vector<double> next(nb, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
      next[i] = safe_ratio(x - knots[i], knots[i + k] - knots[i]) * cur[i] +
                safe_ratio(knots[i + k + 1] - x, knots[i + k + 1] - knots[i + 1]) * cur[i + 1];
    }
    cur = std::move(next);
  }
  basis = std::move(cur);
}

}  // namespace detail

/// Clamps x into the spline domain [knots[K], knots[end-K-1]]; outside it the
/// basis is held constant at the boundary value.
inline double clamp_to_spline_domain(double x, std::span<const double> knots, std::size_t order) {
  return std::clamp(x, knots[order], knots[knots.size() - 1 - order]);
}

/// Degree-K B-spline basis values at x (Cox-de Boor). Result length is knots.size()-K-1.
inline std::vector<double> bspline_basis(double x, std::span<const double> knots, std::size_t order) {
  if (knots.size() < 2 * order + 2) throw ParameterError("bspline_basis: knot vector too short for order");
  std::vector<double> basis, lower;
  detail::cox_de_boor(clamp_to_spline_domain(x, knots, order), knots, order, basis, lower);
  return basis;
}

/// Basis values and their x-derivatives. Derivatives are zero outside the domain.
inline void bspline_basis_and_derivative(double x, std::span<const double> knots, std::size_t order,
                                         std::vector<double>& basis, std::vector<double>& derivative) {
  if (knots.size() < 2 * order + 2) throw ParameterError("bspline_basis: knot vector too short for order");
  const double lo = knots[order];
  const double hi = knots[knots.size() - 1 - order];
  const double xc = std::clamp(x, lo, hi);
  std::vector<double> lower;
  detail::cox_de_boor(xc, knots, order, basis, lower);
  derivative.assign(basis.size(), 0.0);
  if (order == 0 || x < lo || x > hi) return;
  const double k = static_cast<double>(order);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    derivative[i] = k * (detail::safe_ratio(lower[i], knots[i + order] - knots[i]) -
                         detail::safe_ratio(lower[i + 1], knots[i + order + 1] - knots[i + 1]));
  }
}

}  // namespace kaf
