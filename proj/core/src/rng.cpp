#include "ccl/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ccl::rng {

namespace {

// Knuth sequential search in log space; exact, O(mean) uniforms.
std::uint64_t poisson_small(std::mt19937_64& gen, double mean) {
  double acc = 0.0;
  std::uint64_t k = 0;
  for (;;) {
    acc += -std::log(uniform01_open(gen));
    if (acc >= mean) return k;
    ++k;
  }
}

// Hormann's PTRS transformed-rejection sampler; exact for mean >= 10.
std::uint64_t poisson_ptrs(std::mt19937_64& gen, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform01(gen) - 0.5;
    const double v = uniform01_open(gen);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

std::uint64_t poisson(std::mt19937_64& gen, double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_small(gen, mean);
  return poisson_ptrs(gen, mean);
}

}  // namespace ccl::rng
