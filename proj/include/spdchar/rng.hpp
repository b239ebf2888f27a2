#pragma once

#include <cstdint>
#include <initializer_list>

namespace spdchar {

/// SplitMix64 finalizer. Used for seeding and for deriving child streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a stream index.
///
/// Rule: child = mix64(parent + 0x9E3779B97F4A7C15 * (index + 1)).
/// Chained calls build a tree of streams, e.g. master -> scene i -> replicate j
/// -> stage k. Adding a sibling never perturbs existing children.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;
std::uint64_t derive_seed(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// xoshiro256** with portable, hand-written variate generators. The standard
/// library distributions are implementation-defined, so none are used here;
/// every draw is bit-reproducible across platforms given the same seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Box-Muller transform (second variate cached).
  double normal() noexcept;
  /// Poisson(lambda); Knuth's product method for small means, Hormann's PTRS
  /// transformed rejection otherwise.
  std::int64_t poisson(double lambda) noexcept;

private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spdchar
