#include "ccl/stochastic_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ccl/rng.hpp"
#include "ccl/special_math.hpp"

namespace ccl::geometry {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

void check_order(int l, int k, const char* who) {
  if (l < 1) throw std::invalid_argument(std::string(who) + ": l must be >= 1");
  if (l >= k) throw std::invalid_argument(std::string(who) + ": need l < k");
}

// log of the leading conditional-pdf coefficient 2 (k-1)! / ((k-l-1)! (l-1)!),
// factorials in log space so k up to 64 stays representable.
double log_cond_coeff(int l, int k) {
  return std::log(2.0) + std::lgamma(k) - std::lgamma(k - l) - std::lgamma(l);
}

}  // namespace

PPPRealization sample_ppp(double lambda, double radius, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw std::domain_error("sample_ppp: lambda must be positive");
  if (!(radius > 0.0)) throw std::domain_error("sample_ppp: radius must be positive");
  std::mt19937_64 gen(seed);
  const double mean = lambda * kPi * radius * radius;
  const std::uint64_t n = rng::poisson(gen, mean);
  PPPRealization out;
  out.density_lambda = lambda;
  out.window_radius = radius;
  out.seed = seed;
  out.distances.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    out.distances[i] = radius * std::sqrt(rng::uniform01(gen));
  std::sort(out.distances.begin(), out.distances.end());
  return out;
}

double nth_distance_pdf(int n, double lambda, double v) {
  if (n < 1) throw std::invalid_argument("nth_distance_pdf: n must be >= 1");
  if (!(lambda > 0.0)) throw std::domain_error("nth_distance_pdf: lambda must be positive");
  if (v <= 0.0) return 0.0;
  const double log_pl = std::log(kPi * lambda);
  const double lf = std::log(2.0) + n * log_pl + (2 * n - 1) * std::log(v) -
                    kPi * lambda * v * v - std::lgamma(n);
  return std::exp(lf);
}

double joint_distance_pdf(int l, int n, double lambda, double u, double v) {
  check_order(l, n, "joint_distance_pdf");
  if (!(lambda > 0.0)) throw std::domain_error("joint_distance_pdf: lambda must be positive");
  if (u <= 0.0 || v <= 0.0 || u > v) return 0.0;
  const double gap = v * v - u * u;
  if (gap == 0.0 && n - l - 1 > 0) return 0.0;
  double lf = std::log(4.0) + n * std::log(kPi * lambda) - std::lgamma(n - l) - std::lgamma(l) +
              std::log(v) + (2 * l - 1) * std::log(u) - kPi * lambda * v * v;
  if (n - l - 1 > 0) lf += (n - l - 1) * std::log(gap);
  return std::exp(lf);
}

double conditional_distance_pdf(int l, int k, double u, double v) {
  check_order(l, k, "conditional_distance_pdf");
  if (!(v > 0.0)) throw std::domain_error("conditional_distance_pdf: v must be positive");
  if (u <= 0.0 || u > v) return 0.0;
  // The alternating sum over binomials telescopes back to
  //   coeff * u^{2l-1} v^{-2l} (1 - (u/v)^2)^{k-l-1},
  // which is the cancellation-free way to evaluate it.
  const double ratio2 = (u / v) * (u / v);
  const double gap = 1.0 - ratio2;
  if (gap == 0.0 && k - l - 1 > 0) return 0.0;
  double lf = log_cond_coeff(l, k) + (2 * l - 1) * std::log(u) - 2.0 * l * std::log(v);
  if (k - l - 1 > 0) lf += (k - l - 1) * std::log(gap);
  return std::exp(lf);
}

double conditional_distance_cdf(int l, int k, double y, double v) {
  check_order(l, k, "conditional_distance_cdf");
  if (!(v > 0.0)) throw std::domain_error("conditional_distance_cdf: v must be positive");
  if (y <= 0.0) return 0.0;
  if (y >= v) return 1.0;
  // Term-by-term integral of the polynomial conditional density:
  // sum_n alpha'_n (y/v)^{2(n+l)} with alpha'_n carrying the (-1)^n sign.
  const double r2 = (y / v) * (y / v);
  const double lead = std::lgamma(k) - std::lgamma(k - l) - std::lgamma(l);
  double acc = 0.0;
  for (int n = 0; n <= k - l - 1; ++n) {
    const double lt = lead + std::lgamma(k - l) - std::lgamma(n + 1) - std::lgamma(k - l - n) -
                      std::log(static_cast<double>(n + l)) + (n + l) * std::log(r2);
    acc += ((n % 2 == 0) ? 1.0 : -1.0) * std::exp(lt);
  }
  return acc;
}

double min_window_radius(double lambda, int min_points, double tail_prob) {
  if (!(lambda > 0.0)) throw std::domain_error("min_window_radius: lambda must be positive");
  if (min_points < 1) throw std::invalid_argument("min_window_radius: min_points must be >= 1");
  if (!(tail_prob > 0.0 && tail_prob < 1.0))
    throw std::domain_error("min_window_radius: tail_prob must lie in (0,1)");
  // P(N < min_points; mean) = poisson_partial(min_points, mean); bisect on mean.
  double lo = static_cast<double>(min_points);
  double hi = lo;
  while (specfun::poisson_partial(min_points, hi) >= tail_prob) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (specfun::poisson_partial(min_points, mid) >= tail_prob)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(hi / (kPi * lambda));
}

}  // namespace ccl::geometry
