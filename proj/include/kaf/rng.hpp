#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "kaf/error.hpp"

namespace kaf {

/// Counter-based splitmix64 stream. The output depends only on the seed and
/// the number of draws, so streams match across platforms and compilers.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), counter_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return mix(counter_);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept {
    if (lo == hi) return lo;
    double v = lo + (hi - lo) * uniform01();
    if (v >= hi) v = std::nextafter(hi, lo);
    return v;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is kept.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift; bias is below 2^-64 * n and irrelevant here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Independent child stream; the parent is not advanced.
  Rng fork(std::uint64_t stream) const noexcept { return Rng(mix(seed_ ^ mix(stream + 0x632BE59BD9B4E019ULL))); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> sample_gaussian(Rng& rng, double mean, double stddev, std::size_t n) {
  if (!(stddev >= 0.0)) throw ParameterError("sample_gaussian: std must be >= 0, got " + std::to_string(stddev));
  std::vector<double> out(n);
  for (auto& v : out) v = mean + stddev * rng.normal();
  return out;
}

inline std::vector<double> sample_uniform(Rng& rng, double lo, double hi, std::size_t n) {
  if (lo > hi) throw ParameterError("sample_uniform: lo > hi");
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(lo, hi);
  return out;
}

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace kaf
