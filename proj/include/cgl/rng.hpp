#pragma once

#include <cstdint>
#include <vector>

namespace cgl {

/// xoshiro256++ generator with splitmix64 seeding.
///
/// The standard library engines are portable but the distributions are not,
/// so every random draw in the toolkit goes through this class. Identical
/// seeds give identical streams on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform integer in [0, n). n must be nonzero.
  std::uint64_t bounded(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit_double();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i + 1));
      std::swap(v[i], v[j]);
    }
  }

private:
  std::uint64_t s_[4];
};

}  // namespace cgl
