#pragma once

#include <cstdint>
#include <random>

namespace neurodream {

using Rng = std::mt19937_64;

// Independent random streams of one training run. Values are part of the
// seed-derivation scheme and must stay stable across versions.
enum class Stream : std::uint64_t {
  kEnvironment = 1,
  kAgentSubstrate = 2,
  kModelSubstrate = 3,
  kEncoding = 4,
  kActionSampling = 5,
  kPolicyInit = 6,
  kDreamStart = 7,
  kProbe = 8,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based derivation: seed = mix(mix(mix(master) ^ run) ^ stream).
// The stream seed does not depend on the training mode, so a baseline and a
// dreaming run with the same master seed and run id share substrates.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_id,
                                    Stream stream) {
  return mix64(mix64(mix64(master) ^ run_id) ^
               static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t run_id, Stream stream) {
  return Rng{derive_seed(master, run_id, stream)};
}

}  // namespace neurodream
