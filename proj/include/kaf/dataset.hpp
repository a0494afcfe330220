#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kaf/error.hpp"
#include "kaf/matrix.hpp"

namespace kaf {

enum class TaskKind { Regression, Classification };
enum class Split { Train, Test };

/// Inputs and targets. Regression targets may be stored standardized:
/// original = stored * target_scale + target_shift.
struct Dataset {
  Matrix x;
  Matrix y;
  TaskKind task = TaskKind::Regression;
  Split split = Split::Train;
  std::size_t num_classes = 0;
  double target_shift = 0.0;
  double target_scale = 1.0;

  std::size_t size() const noexcept { return x.rows(); }
};

inline void validate_dataset(const Dataset& d) {
  if (d.x.rows() != d.y.rows())
    throw DataError("dataset: " + std::to_string(d.x.rows()) + " inputs but " + std::to_string(d.y.rows()) + " targets");
  if (d.task == TaskKind::Classification) {
    if (d.y.cols() != 1) throw DataError("dataset: classification targets must be a single label column");
    for (double v : d.y.values())
      if (v < 0.0 || v >= static_cast<double>(d.num_classes) || v != std::floor(v))
        throw DataError("dataset: label " + std::to_string(v) + " outside [0, " + std::to_string(d.num_classes) + ")");
  }
}

/// Standardizes both splits with the training targets' mean and std.
inline void standardize_targets(Dataset& train, Dataset& test) {
  if (train.task != TaskKind::Regression) return;
  const auto& y = train.y.values();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
  for (Dataset* d : {&train, &test}) {
    for (auto& v : d->y.values()) v = (v * d->target_scale + d->target_shift - mean) / sd;
    d->target_shift = mean;
    d->target_scale = sd;
  }
}

/// Rows `idx` of a matrix.
inline Matrix gather_rows(const Matrix& m, const std::size_t* idx, std::size_t count) {
  Matrix out(count, m.cols());
  for (std::size_t i = 0; i < count; ++i) {
    auto src = m.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace kaf
