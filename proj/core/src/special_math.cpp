#include "ccl/special_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ccl::specfun {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240;
constexpr double kLog2E = 1.4426950408889634073599246810019;

// Alternating/positive partial sum in extended precision with Neumaier
// compensation; returns e^{-x} * sum_{i<n} x^i/i! as long double.
long double poisson_partial_direct_ld(int n, long double x) {
  long double term = 1.0L;
  long double sum = 1.0L;
  long double comp = 0.0L;
  for (int i = 1; i < n; ++i) {
    term *= x / i;
    const long double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return std::exp(-x) * (sum + comp);
}

// Complement route for x < 0 once the truncation index is well past |x|: the
// direct alternating sum then collapses toward e^x and cancels away most of
// its digits, while the series tail starts at its decaying end and stays
// well-conditioned:  e^{-x} sum_{i<n} = 1 - e^{-x} sum_{i>=n}.
long double poisson_partial_complement_ld(int n, long double x) {
  const long double lx = std::log(-x);
  const long double log_t0 = n * lx - std::lgamma(static_cast<long double>(n) + 1.0L);
  long double term = ((n % 2 == 0) ? 1.0L : -1.0L) * std::exp(log_t0);
  long double tail = term;
  long double comp = 0.0L;
  for (int i = n + 1; i < n + 100000; ++i) {
    term *= x / i;
    const long double t = tail + term;
    if (std::fabs(tail) >= std::fabs(term))
      comp += (tail - t) + term;
    else
      comp += (term - t) + tail;
    tail = t;
    if (std::fabs(term) < 1e-25L * std::fabs(tail + comp)) break;
  }
  return 1.0L - std::exp(-x) * (tail + comp);
}

long double poisson_partial_ld(int n, long double x) {
  if (x >= 0.0L || static_cast<long double>(n) <= -x + 8.0L)
    return poisson_partial_direct_ld(n, x);
  return poisson_partial_complement_ld(n, x);
}

// Regularized lower incomplete gamma by series, x < s+1.
double gamma_p_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(s * std::log(x) - x - std::lgamma(s));
}

// Regularized upper incomplete gamma by Lentz continued fraction, x >= s+1.
double gamma_q_cf(double s, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(s * std::log(x) - x - std::lgamma(s));
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Implicit-QL eigen decomposition of a symmetric tridiagonal Jacobi matrix,
// accumulating the first eigenvector components in z (Golub-Welsch).
// d: diagonal (n), e: subdiagonal (n-1, resized to n as workspace).
void solve_jacobi(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  if (n == 1) return;
  e.resize(n, 0.0);
  const double prec = std::numeric_limits<double>::epsilon();
  for (int l = 1; l <= n; ++l) {
    int iter = 0;
    for (;;) {
      int m;
      for (m = l; m <= n; ++m) {
        if (m == n) break;
        if (std::fabs(e[m - 1]) <= prec * (std::fabs(d[m - 1]) + std::fabs(d[m]))) break;
      }
      double p = d[l - 1];
      if (m == l) break;
      if (iter >= 60) throw std::runtime_error("gauss_laguerre: QL iteration failed");
      ++iter;
      double g = (d[l] - p) / (2.0 * e[l - 1]);
      double r = std::hypot(g, 1.0);
      g = d[m - 1] - p + e[l - 1] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      p = 0.0;
      for (int ii = 1; ii <= m - l; ++ii) {
        const int i = m - ii;
        double f = s * e[i - 1];
        const double b = c * e[i - 1];
        if (std::fabs(f) >= std::fabs(g)) {
          c = g / f;
          r = std::hypot(c, 1.0);
          e[i] = f * r;
          s = 1.0 / r;
          c *= s;
        } else {
          s = f / g;
          r = std::hypot(s, 1.0);
          e[i] = g * r;
          c = 1.0 / r;
          s *= c;
        }
        g = d[i] - p;
        r = (d[i - 1] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i] = g + p;
        g = c * r - b;
        f = z[i];
        z[i] = s * z[i - 1] + c * f;
        z[i - 1] = c * z[i - 1] - s * f;
      }
      d[l - 1] -= p;
      e[l - 1] = g;
      e[m - 1] = 0.0;
    }
  }
}

GaussRule build_gauss_laguerre(int n) {
  std::vector<double> d(n), e(n > 1 ? n - 1 : 0), z(n, 0.0);
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + 1.0;
  for (int k = 0; k + 1 < n; ++k) e[k] = static_cast<double>(k + 1);
  z[0] = 1.0;
  solve_jacobi(d, e, z);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = d[order[i]];
    rule.weights[i] = z[order[i]] * z[order[i]];  // mu0 = 1 for weight e^-x
  }
  return rule;
}

const GaussRule& fallback_rule() {
  static const GaussRule rule = build_gauss_laguerre(200);
  return rule;
}

// Scale below which the closed form of mean_log1p_gamma loses digits to the
// e^{+1/scale} x e^{-1/scale} product and the quadrature route takes over.
constexpr double kClosedFormMinScale = 0.05;

double log_moment_quadrature(int dof, double scale) {
  const GaussRule& gl = fallback_rule();
  const double lg = std::lgamma(static_cast<double>(dof));
  long double acc = 0.0L;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double x = gl.nodes[i];
    const double density = std::exp((dof - 1) * std::log(x) - lg);
    acc += static_cast<long double>(gl.weights[i]) * std::log1p(scale * x) * density;
  }
  return static_cast<double>(acc);
}

double log_moment_closed(int dof, double scale) {
  const long double u = 1.0L / static_cast<long double>(scale);
  long double acc =
      poisson_partial_ld(dof, -u) * static_cast<long double>(exp_integral(1, static_cast<double>(u)));
  for (int m = 1; m < dof; ++m)
    acc += poisson_partial_ld(m, u) * poisson_partial_ld(dof - m, -u) / m;
  return static_cast<double>(acc);
}

}  // namespace

double poisson_partial(int n, double x) {
  if (n < 1) throw std::invalid_argument("poisson_partial: n must be >= 1");
  if (x == 0.0) return 1.0;
  if (x > 0.0) {
    // All series terms positive: log-sum-exp, then fold in e^-x.
    const double lx = std::log(x);
    double peak = 0.0;
    for (int i = 1; i < n; ++i) peak = std::max(peak, i * lx - std::lgamma(i + 1.0));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(i * lx - std::lgamma(i + 1.0) - peak);
    return std::exp(peak - x + std::log(sum));
  }
  return static_cast<double>(poisson_partial_ld(n, static_cast<long double>(x)));
}

double exp_integral(int n, double x) {
  if (n < 1) throw std::invalid_argument("exp_integral: n must be >= 1");
  if (x < 0.0) throw std::domain_error("exp_integral: x must be nonnegative");
  if (x == 0.0) {
    if (n >= 2) return 1.0 / (n - 1);
    throw std::domain_error("exp_integral: diverges at n = 1, x = 0");
  }
  if (x > 1.0) {
    // Lentz continued fraction.
    constexpr double kTiny = 1e-300;
    double b = x + n;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
      const double a = -static_cast<double>(i) * (n - 1.0 + i);
      b += 2.0;
      d = 1.0 / (a * d + b);
      c = b + a / c;
      const double delta = c * d;
      h *= delta;
      if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
  }
  // Power series with the digamma term at i = n-1.
  double ans = (n - 1 != 0) ? 1.0 / (n - 1) : -std::log(x) - kEulerGamma;
  double fact = 1.0;
  for (int i = 1; i <= 10000; ++i) {
    fact *= -x / i;
    double del;
    if (i != n - 1) {
      del = -fact / (i - (n - 1));
    } else {
      double psi = -kEulerGamma;
      for (int ii = 1; ii <= n - 1; ++ii) psi += 1.0 / ii;
      del = fact * (-std::log(x) + psi);
    }
    ans += del;
    if (std::fabs(del) < std::fabs(ans) * 1e-17) break;
  }
  return ans;
}

double gamma_p(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("gamma_p: s must be positive");
  if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

double gamma_q(double s, double x) {
  if (!(s > 0.0)) throw std::domain_error("gamma_q: s must be positive");
  if (x < 0.0) throw std::domain_error("gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double incomplete_gamma(double s, double x, GammaKind kind) {
  if (x < 0.0) throw std::domain_error("incomplete_gamma: x must be nonnegative");
  if (kind == GammaKind::lower) {
    if (!(s > 0.0))
      throw std::domain_error("incomplete_gamma: lower kind diverges for s <= 0");
    return gamma_p(s, x) * std::tgamma(s);
  }
  if (s > 0.0) return gamma_q(s, x) * std::tgamma(s);
  if (x == 0.0)
    throw std::domain_error("incomplete_gamma: upper kind requires x > 0 for s <= 0");
  // Lift s into (0,1] and unwind G(s,x) = (G(s+1,x) - x^s e^-x)/s downward.
  const int lifts = static_cast<int>(std::floor(-s)) + 1;
  double g = gamma_q(s + lifts, x) * std::tgamma(s + lifts);
  for (int i = lifts; i >= 1; --i) {
    const double si = s + i - 1;
    if (si == 0.0) {
      g = exp_integral(1, x);  // G(0,x) is the exponential integral
    } else {
      g = (g - std::exp(si * std::log(x) - x)) / si;
    }
  }
  return g;
}

void gauss_laguerre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");
  GaussRule rule = build_gauss_laguerre(n);
  nodes = std::move(rule.nodes);
  weights = std::move(rule.weights);
}

double mean_log1p_gamma(int dof, double scale) {
  if (dof < 1 || dof > 128)
    throw std::invalid_argument("mean_log1p_gamma: dof must lie in [1, 128]");
  if (!(scale > 0.0)) throw std::domain_error("mean_log1p_gamma: scale must be positive");
  if (scale < kClosedFormMinScale) return log_moment_quadrature(dof, scale);
  return log_moment_closed(dof, scale);
}

double qlb_rate(int dof, double sir) {
  if (!(sir > 0.0)) throw std::domain_error("qlb_rate: sir must be positive");
  return mean_log1p_gamma(dof, sir) * kLog2E;
}

double qlb_rate_inverse(int dof, double rate_bits) {
  if (dof < 1 || dof > 128)
    throw std::invalid_argument("qlb_rate_inverse: dof must lie in [1, 128]");
  if (rate_bits < 0.0) throw std::domain_error("qlb_rate_inverse: rate must be nonnegative");
  if (rate_bits == 0.0) return 0.0;

  double lo = 0.0;
  double flo = -rate_bits;  // qlb_rate -> 0 as sir -> 0+
  double hi = 1.0;
  double fhi = qlb_rate(dof, hi) - rate_bits;
  int guard = 0;
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (++guard > 1060) throw std::runtime_error("qlb_rate_inverse: bracket growth failed");
    fhi = qlb_rate(dof, hi) - rate_bits;
  }
  if (fhi == 0.0) return hi;

  const double tol = 1e-12 * std::max(1.0, rate_bits);
  double mid = 0.5 * (lo + hi);
  int last_side = 0;  // Illinois stagnation tracking: -1 low side, +1 high side
  for (int it = 0; it < 300; ++it) {
    mid = hi - fhi * (hi - lo) / (fhi - flo);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    const double fmid = qlb_rate(dof, mid) - rate_bits;
    if (std::fabs(fmid) <= tol) return mid;
    if (fmid < 0.0) {
      lo = mid;
      flo = fmid;
      if (last_side == -1) fhi *= 0.5;
      last_side = -1;
    } else {
      hi = mid;
      fhi = fmid;
      if (last_side == +1) flo *= 0.5;
      last_side = +1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return 0.5 * (lo + hi);
  }
  throw std::runtime_error("qlb_rate_inverse: residual tolerance not reached");
}

}  // namespace ccl::specfun
