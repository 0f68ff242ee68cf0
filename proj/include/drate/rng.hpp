#pragma once

#include <cmath>
#include <cstdint>

namespace drate::rng {

// All randomness in the library flows through a 64-bit counter-based
// generator (splitmix64). Substreams are derived by hashing, never by
// jumping, so any draw can be reproduced in isolation:
//
//   master seed --combine(tag)--> purpose stream --combine(i)--> sample i
//
// Tags keep covariates, treatment assignment, noise and replications on
// independent streams. A sample's values depend only on (seed, tag, i),
// which makes generation order-independent and trivially parallel.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Derive a substream seed from (seed, word).
inline std::uint64_t combine(std::uint64_t seed, std::uint64_t word) {
  return mix64(seed ^ mix64(word + kGolden));
}

// Purpose tags for the documented stream split.
inline constexpr std::uint64_t kStreamCovariates = 0x636f766172ULL;
inline constexpr std::uint64_t kStreamTreatment = 0x7472656174ULL;
inline constexpr std::uint64_t kStreamNoise = 0x6e6f697365ULL;
inline constexpr std::uint64_t kStreamReplication = 0x7265706cULL;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// Uniform on [0, 1) with 53-bit resolution.
inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g.next() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes two draws. The log argument is
// shifted into (0, 1] so it never sees zero.
inline double normal(SplitMix64& g) {
  const double u1 = (static_cast<double>(g.next() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(g.next() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925287 * u2);
}

inline int bernoulli(SplitMix64& g, double p) {
  return uniform01(g) < p ? 1 : 0;
}

}  // namespace drate::rng
