#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace nie {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 output mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Derives an independent child seed from (parent, index). Pure function,
/// so replication i gets the same stream regardless of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent ^ 0x6A09E667F3BCC909ULL) + (index + 1) * kGolden);
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Sequential SplitMix64 stream. Satisfies UniformRandomBitGenerator.
/// Bounded draws are implemented here instead of <random> distributions so
/// sampled outputs are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() noexcept { return to_unit((*this)()); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's nearly-divisionless rejection.
    uint128 m = static_cast<uint128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates with Rng::below, so the permutation does not depend on the
/// standard library.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) noexcept {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

/// A live-edge realization of the diffusion randomness. Edge e's coin is the
/// e-th output of a SplitMix64 stream keyed by `key`, evaluated by random
/// access. Every cascade run against the same world sees the same coins no
/// matter which edges it happens to attempt, which is what makes common
/// random numbers exact.
class LiveEdgeWorld {
 public:
  explicit constexpr LiveEdgeWorld(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  double coin(std::uint64_t edge) const noexcept {
    return to_unit(mix64(key_ + (edge + 1) * kGolden));
  }

  bool live(std::uint64_t edge, double probability) const noexcept {
    return coin(edge) < probability;
  }

 private:
  std::uint64_t key_;
};

}  // namespace nie
