#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kaf/matrix.hpp"

namespace kaf {

/// Named view of one parameter tensor. Vectors are exposed as 1 x n.
struct TensorRef {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<double> values;
};

inline TensorRef tensor_ref(std::string name, Matrix& m) {
  return {std::move(name), m.rows(), m.cols(), m.values()};
}

inline TensorRef tensor_ref(std::string name, std::vector<double>& v) {
  return {std::move(name), 1, v.size(), std::span<double>(v)};
}

inline std::size_t total_size(const std::vector<TensorRef>& ts) {
  std::size_t n = 0;
  for (const auto& t : ts) n += t.values.size();
  return n;
}

}  // namespace kaf
