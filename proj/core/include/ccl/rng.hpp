#pragma once

#include <cstdint>
#include <random>

namespace ccl::rng {

/// SplitMix64 step; the generator behind stream-seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based stream derivation: stream `index` of a master seed.
/// Independent of the order in which streams are instantiated, so parallel
/// consumers of (master, 0..n-1) reproduce the same draws regardless of
/// scheduling.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= index * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Uniform double in [0,1) from the high 53 bits; bit-exact across platforms.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0,1]; safe as a log() argument.
inline double uniform01_open(std::mt19937_64& gen) {
  return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal pair via Box-Muller (both values consumed by callers
/// that need complex Gaussians).
inline void normal_pair(std::mt19937_64& gen, double& x, double& y) {
  const double u = uniform01_open(gen);
  const double v = uniform01(gen);
  const double r = std::sqrt(-2.0 * std::log(u));
  const double t = 6.283185307179586476925286766559 * v;
  x = r * std::cos(t);
  y = r * std::sin(t);
}

/// Exact Poisson sampler: sequential inversion for small means, Hormann's
/// PTRS transformed rejection for large ones. Deterministic draw order.
std::uint64_t poisson(std::mt19937_64& gen, double mean);

}  // namespace ccl::rng
