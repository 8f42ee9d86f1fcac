#pragma once

#include <cstdint>
#include <random>

namespace chemnet {

// splitmix64 finalizer; used to derive independent seeds from a master seed
// plus stream tags, and as a counter-based source for per-link draws.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ b);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t id = 0) {
  return std::mt19937_64(mix64(seed, tag, id));
}

// Stream tags for the per-purpose generators of one trial.
namespace rng_tag {
inline constexpr std::uint64_t kTopology = 1;
inline constexpr std::uint64_t kShadowing = 2;
inline constexpr std::uint64_t kMacBackoff = 3;
inline constexpr std::uint64_t kAppJitter = 4;
inline constexpr std::uint64_t kTraffic = 5;
inline constexpr std::uint64_t kRrrShunt = 6;
inline constexpr std::uint64_t kSources = 7;
}  // namespace rng_tag

// Deterministic standard gaussian from a counter (Box-Muller over two mixed
// uniforms). Same key, same value; no state to store per link.
double gaussian_from_key(std::uint64_t key);

}  // namespace chemnet
