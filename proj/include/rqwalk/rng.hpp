#pragma once

#include <cstdint>
#include <random>

namespace rqwalk {

// splitmix64 finalizer; good avalanche, cheap enough to call per lattice site.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Combine a seed with a stream index so parallel substreams never collide.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ mix64(stream * 0x9e3779b97f4a7c15ull + 0x1b873593ull));
}

// Uniform double in [0,1) from a 64-bit word, 53-bit mantissa.
inline double uniform01(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Counter-mode generator: value depends only on (seed, counter), never on call
// order.  Used for per-site phase draws so a field can be evaluated lazily.
inline double counter_uniform01(std::uint64_t seed, std::uint64_t counter) {
  return uniform01(mix64(seed ^ mix64(counter)));
}

// Sequential engine for bulk Monte Carlo streams.
inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(substream_seed(master, stream));
}

}  // namespace rqwalk
