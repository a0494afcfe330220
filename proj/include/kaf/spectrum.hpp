#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "kaf/error.hpp"

namespace kaf {

/// One-sided magnitude spectrum. frequencies are in cycles per unit of the
/// sample spacing; magnitudes are |X_k| of the unnormalized DFT.
struct Spectrum {
  std::vector<double> frequencies;
  std::vector<double> magnitudes;
  std::size_t n = 0;

  std::size_t peak_bin() const {
    std::size_t best = 0;
    for (std::size_t k = 1; k < magnitudes.size(); ++k)
      if (magnitudes[k] > magnitudes[best]) best = k;
    return best;
  }
};

/// Direct O(n^2) DFT. Twiddles come from an exact index table (j*k mod n) so
/// round-off does not grow with n.
inline Spectrum dft_magnitude(std::span<const double> signal, double sample_spacing) {
  const std::size_t n = signal.size();
  if (n < 2) throw ParameterError("dft_magnitude: need at least 2 samples");
  if (!(sample_spacing > 0.0)) throw ParameterError("dft_magnitude: sample spacing must be > 0");

  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    cos_table[j] = std::cos(ang);
    sin_table[j] = std::sin(ang);
  }

  Spectrum s;
  s.n = n;
  const std::size_t bins = n / 2 + 1;
  s.frequencies.resize(bins);
  s.magnitudes.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      re += signal[j] * cos_table[idx];
      im -= signal[j] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    s.magnitudes[k] = std::hypot(re, im);
    s.frequencies[k] = static_cast<double>(k) / (static_cast<double>(n) * sample_spacing);
  }
  return s;
}

}  // namespace kaf
