#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bnci {

using Rng = std::mt19937_64;

/// Mixes a list of integers into one 64-bit seed (splitmix64 finalizer chained
/// over the inputs). Used to derive independent, reproducible streams such as
/// (master seed, n, replicate, role) or (seed, permutation replicate).
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t p : parts) {
    h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
  }
  return h;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace bnci
