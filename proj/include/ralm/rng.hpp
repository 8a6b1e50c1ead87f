#pragma once

#include <cstdint>

namespace ralm {

// Purpose tags keep independent parts of the pipeline on disjoint streams.
enum class RngPurpose : uint32_t {
  kPositions = 1,
  kMeasurements = 2,
  kBoarding = 3,
  kWeightInit = 4,
  kDropout = 5,
  kShuffle = 6,
  kSearch = 7,
};

// Counter-based deterministic random stream.
//
// Stream state is derived from (master_seed, purpose, index) with the
// SplitMix64 finalizer and then stepped as a plain SplitMix64 sequence:
//
//   mix(z): z += 0x9E3779B97F4A7C15
//           z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//           return z ^ (z >> 31)
//
//   state0 = mix(mix(mix(master_seed) ^ purpose) ^ index)
//
// Identical (seed, purpose, index) always produce the identical draw
// sequence, independent of any other stream, so samples can be generated
// in any order or in parallel with bit-identical results. This derivation
// is part of the on-disk reproducibility contract: datasets record only
// the master seed, so the scheme must not change silently.
class RngStream {
 public:
  RngStream(uint64_t master_seed, RngPurpose purpose, uint64_t index);

  uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_double();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer on [0, n), n >= 1. Rejection sampled, unbiased.
  uint64_t uniform_index(uint64_t n);

  // Normal(mu, sigma^2) via Box-Muller; consumes exactly two uniforms.
  double normal(double mu, double sigma);

  // LogNormal with (mu, sigma) the parameters of the underlying normal.
  double lognormal(double mu, double sigma);

 private:
  uint64_t state_;
};

}  // namespace ralm
