#include "ralm/rng.hpp"

#include <cmath>

namespace ralm {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix(uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(uint64_t master_seed, RngPurpose purpose, uint64_t index)
    : state_(mix(mix(mix(master_seed) ^ static_cast<uint64_t>(purpose)) ^ index)) {}

uint64_t RngStream::next_u64() {
  state_ += kGolden;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

uint64_t RngStream::uniform_index(uint64_t n) {
  // Rejection below the largest multiple of n keeps the draw unbiased.
  const uint64_t limit = n * (UINT64_MAX / n);
  uint64_t u;
  do {
    u = next_u64();
  } while (u >= limit);
  return u % n;
}

double RngStream::normal(double mu, double sigma) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngStream::lognormal(double mu, double sigma) {
  return std::exp(normal(mu, sigma));
}

}  // namespace ralm
