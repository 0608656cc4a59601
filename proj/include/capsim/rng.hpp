#pragma once

#include <cstdint>
#include <random>

namespace capsim {

/// splitmix64 finalizer. Stable across platforms, used to derive independent
/// sub-stream seeds so results never depend on evaluation order.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d49bb133111aebULL;
  return x ^ (x >> 31);
}

/// Derive the seed of a named sub-stream from the user seed and up to two
/// indices (trial number, relay index, ...).
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t a = 0,
                            uint64_t b = 0) {
  uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ tag);
  h = mix64(h ^ a);
  return mix64(h ^ b);
}

inline std::mt19937_64 make_rng(uint64_t seed, uint64_t tag, uint64_t a = 0,
                                uint64_t b = 0) {
  return std::mt19937_64(derive_seed(seed, tag, a, b));
}

/// Stream tags. Each random purpose gets its own stream so adding trials to
/// one estimator never shifts another's draws.
enum StreamTag : uint64_t {
  kStreamPlacement = 1,
  kStreamTraffic = 2,
  kStreamPhase = 3,
  kStreamSymbol = 4,
  kStreamSuccess = 5,
  kStreamRow = 6,
};

}  // namespace capsim
