#pragma once

#include <cmath>
#include <vector>

#include "kaf/dataset.hpp"
#include "kaf/error.hpp"
#include "kaf/network.hpp"
#include "kaf/spectrum.hpp"

namespace kaf {

struct SpectrumComparison {
  Spectrum model;
  Spectrum truth;
  bool peak_match = false;
};

/// Predictions and targets must sit on one evenly spaced 1-D grid.
inline double uniform_spacing(const Dataset& data) {
  if (data.x.cols() != 1 || data.y.cols() != 1) throw ParameterError("spectrum_compare: dataset must be 1-D regression");
  if (data.size() < 2) throw ParameterError("spectrum_compare: need at least two samples");
  const double h = data.x(1, 0) - data.x(0, 0);
  if (!(h > 0.0)) throw ParameterError("spectrum_compare: inputs must be increasing");
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (std::fabs((data.x(i, 0) - data.x(i - 1, 0)) - h) > 1e-6 * std::max(1.0, std::fabs(h)))
      throw ParameterError("spectrum_compare: inputs are not evenly spaced");
  }
  return h;
}

inline SpectrumComparison compare_spectra(const std::vector<double>& prediction, const Dataset& data) {
  const double h = uniform_spacing(data);
  if (prediction.size() != data.size()) throw ShapeError("spectrum_compare: prediction length mismatch");
  std::vector<double> truth(data.y.values().begin(), data.y.values().end());
  SpectrumComparison c{dft_magnitude(prediction, h), dft_magnitude(truth, h), false};
  c.peak_match = c.model.peak_bin() == c.truth.peak_bin();
  return c;
}

inline SpectrumComparison spectrum_compare(const Network& net, const Dataset& data) {
  uniform_spacing(data);
  const Matrix pred = predict(net, data.x);
  return compare_spectra(std::vector<double>(pred.values().begin(), pred.values().end()), data);
}

}  // namespace kaf
