#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "iemso/core.hpp"

namespace iemso {

/// Derives an independent child seed from a parent seed and a label/index.
/// Stable across platforms (splitmix64 finalizer over FNV-1a of the label).
RngSeed derive_seed(RngSeed parent, std::string_view label, std::uint64_t index = 0);

/// Seeded generator. Every draw is computed from raw 64-bit engine output so
/// sequences do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

  /// `k` distinct indices from [0, n) in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace iemso
