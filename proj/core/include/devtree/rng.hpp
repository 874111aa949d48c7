#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace devtree {

// Stream derivation, version 1.
//
// Replicate r of a run seeded with s draws from an mt19937_64 engine seeded
// with mix64(s ^ mix64(r + 1)) where mix64 is the SplitMix64 finalizer.
// The derivation depends only on (s, r), never on scheduling, so ensembles
// are reproducible for any worker count. Bump kStreamVersion if this ever
// changes; the value is recorded in run summaries.
inline constexpr int kStreamVersion = 1;

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t base_seed,
                                        std::uint64_t replicate) {
  return mix64(base_seed ^ mix64(replicate + 1));
}

// Draw helpers sit on top of raw 64-bit output instead of the standard
// distributions, whose exact sequences are implementation defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_replicate(std::uint64_t base_seed, std::uint64_t replicate) {
    return Rng(derive_stream_seed(base_seed, replicate));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution. Never returns 1.
  double uniform01() {
    return static_cast<double>(bits() >> 11) * 0x1.0p-53;
  }

  // Exponential with the given rate (> 0). u < 1 always, so finite.
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace devtree
