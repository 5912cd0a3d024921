#pragma once

// Counter-style randomness keyed by (seed, multi-index).
//
// The sampling contract is bit-exact and shared by every implementation:
//   key     = seed ^ fnv1a64(index components as little-endian u64)
//   u       = first output of SplitMix64 seeded with key
//   uniform = u / 2^64
// An entry is kept iff uniform < p.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace tsparse {

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // 53-bit uniform in [0, 1).
  double uniform53() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t fnv1a64(std::span<const std::size_t> index) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t component : index) {
    auto v = static_cast<std::uint64_t>(component);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

constexpr std::uint64_t index_key(std::uint64_t seed,
                                  std::span<const std::size_t> index) noexcept {
  return seed ^ fnv1a64(index);
}

// First SplitMix64 output for (seed, index).
constexpr std::uint64_t keyed_u64(std::uint64_t seed,
                                  std::span<const std::size_t> index) noexcept {
  SplitMix64 gen(index_key(seed, index));
  return gen();
}

inline double keyed_uniform(std::uint64_t seed,
                            std::span<const std::size_t> index) noexcept {
  return static_cast<double>(keyed_u64(seed, index)) * 0x1.0p-64;
}

// Standard normal for (seed, index): Box-Muller on the first two 53-bit
// uniforms of the keyed SplitMix64 stream, cosine branch.
inline double keyed_gaussian(std::uint64_t seed,
                             std::span<const std::size_t> index) noexcept {
  SplitMix64 gen(index_key(seed, index));
  const double u1 = gen.uniform53();
  const double u2 = gen.uniform53();
  return std::sqrt(-2.0 * std::log1p(-u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Seeds for independent sub-runs (trials, restarts): SplitMix64(seed ^ i).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t sub_index) noexcept {
  SplitMix64 gen(seed ^ sub_index);
  return gen();
}

}  // namespace tsparse
