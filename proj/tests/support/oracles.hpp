#pragma once

// Test-only oracles. Everything here deliberately avoids the implementation
// paths it is used to check: extended-precision series instead of long-double
// compensation, tanh-sinh / exp-sinh quadrature instead of continued
// fractions, dense grid searches instead of closed forms.

#include <cstdint>
#include <functional>
#include <utility>

namespace ccl::test {

/// e^{-x} sum_{i<n} x^i/i! evaluated in 50-digit floating point.
double mp_poisson_partial(int n, double x);

/// integral over [1, inf) of t^{-n} e^{-x t} by exp-sinh quadrature.
double quad_exp_integral(int n, double x);

/// Upper/lower incomplete gamma by adaptive quadrature (s may be <= 0 for the
/// upper kind with x > 0).
double quad_upper_gamma(double s, double x);
double quad_lower_gamma(double s, double x);

/// E[ln(1 + scale*G)], G ~ Gamma(dof,1), by Gauss-Laguerre at `nodes` points.
double gl_log_moment(int nodes, int dof, double scale);

/// Same expectation by tanh-sinh quadrature on split ranges (independent of
/// any Laguerre machinery).
double ts_log_moment(int dof, double scale);

/// Bisection solve of f(x) = target on [lo, hi]; f must be increasing.
double bisect_increasing(const std::function<double(double)>& f, double target, double lo,
                         double hi, int iters = 200);

/// Approximate upper quantile of the chi-square distribution
/// (Wilson-Hilferty); good to a few percent for df >= 3.
double chi2_quantile(double df, double p);

/// xorshift-free deterministic pseudo-uniforms for test parameter sampling.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

}  // namespace ccl::test
