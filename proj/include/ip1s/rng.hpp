/// @file rng.hpp
/// @brief Deterministic seedable random number generator.
///
/// xoshiro256** seeded through splitmix64. Every randomized routine in the
/// library takes an explicit 64-bit seed (or an Rng) so runs are reproducible
/// across platforms; nothing reads global entropy.
#pragma once

#include <cstdint>

namespace ip1s {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  // Independent stream derived from this seed and a stream index, so
  // parallel trials can each get their own generator.
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform value in [0, n), n >= 1. Rejection keeps it exactly uniform.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v;
    do {
      v = u64();
    } while (v >= limit);
    return v % n;
  }

  bool coin() { return u64() & 1; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace ip1s
