#pragma once

#include <cstdint>

namespace cantordiff {

/// Stateless counter-based generator. Every node label is a pure function of
/// (seed, trial, side, level, node), so the order in which nodes are visited
/// and the worker that visits them do not affect the sample.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t trial, int side, int level,
                               std::uint64_t node) const noexcept {
    std::uint64_t h = mix(seed_);
    h = mix(h ^ trial);
    h = mix(h ^ ((static_cast<std::uint64_t>(side) << 32) | static_cast<std::uint32_t>(level)));
    return mix(h ^ node);
  }

  /// Uniform double in [0,1) with 53 random bits.
  constexpr double uniform(std::uint64_t trial, int side, int level,
                           std::uint64_t node) const noexcept {
    return static_cast<double>(bits(trial, side, level, node) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace cantordiff
