#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace somqe {

// std::mt19937_64 output is fully specified by the standard, but the
// standard distributions are not. The helpers below draw from the raw
// engine so that seeded runs are identical across standard libraries.
using Engine = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection sampling. n must be positive.
inline std::uint64_t uniform_index(Engine& engine, std::uint64_t n) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  // Largest multiple of n representable, expressed as an exclusive bound.
  const std::uint64_t rem = (kMax % n + 1) % n;
  const std::uint64_t limit = kMax - rem;  // accept x <= limit
  std::uint64_t x = engine();
  while (x > limit) x = engine();
  return x % n;
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace somqe
