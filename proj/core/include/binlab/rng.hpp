#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace binlab {

/// Counter-based generator: draw k is a pure function of (seed, k), so the
/// sequence is identical on every platform and the state is two integers.
///
/// The mixing function is the SplitMix64 finalizer applied to
/// seed_key + k * golden_gamma.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller (consumes two draws).
  double normal() noexcept;
  /// +1 or -1 with equal probability.
  double sign() noexcept;

  /// Independent child stream for a given index; does not advance *this.
  Rng fork(std::uint64_t stream) const noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// 0..n-1 in shuffled order.
  std::vector<std::size_t> permutation(std::size_t n) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace binlab
