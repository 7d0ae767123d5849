#pragma once

#include <cstdint>
#include <random>

namespace mms {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `stream_id` of `master`:
///   split_seed(m, s) = mix64(mix64(m) ^ (s * 0xd1342543de82ef95))
/// Every generator that fans out (batches, trials, indices) derives its
/// sub-seeds this way, so results do not depend on execution order.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream_id) {
  return mix64(mix64(master) ^ (stream_id * 0xd1342543de82ef95ULL));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mms
