#include "ccl/distortion_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <future>
#include <stdexcept>
#include <vector>

#include "ccl/phy_link.hpp"
#include "ccl/rng.hpp"
#include "ccl/special_math.hpp"
#include "ccl/stochastic_geometry.hpp"

namespace ccl::distortion {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kClampSlack = 1e-9;

void check_model(int l1, int l2, double eta, const char* who) {
  if (l1 < 1 || l1 >= l2) throw std::invalid_argument(std::string(who) + ": need 1 <= l1 < l2");
  if (!(eta > 2.0)) throw std::domain_error(std::string(who) + ": eta must exceed 2");
}

// Clamp to [0,1]; anything further out than the slack indicates a formula or
// precision failure and must not be hidden.
double clamp_probability(double p, const char* who) {
  if (!(p > -kClampSlack) || !(p < 1.0 + kClampSlack))
    throw std::runtime_error(std::string(who) + ": value " + std::to_string(p) +
                             " is outside [0,1] beyond tolerance");
  return std::min(1.0, std::max(0.0, p));
}

// alpha'_n / Gamma(l2) = (-1)^n C(l2-l1-1, n) / ((l2-l1-1)! (l1-1)! (n+l1)).
// The (l2-1)! of alpha'_n cancels against the Gamma(l2) normalization, which
// also keeps magnitudes small for large diversity orders.
double alpha_prime_over_gamma_l2(int n, int l1, int l2) {
  const double lmag = -std::lgamma(n + 1) - std::lgamma(l2 - l1 - n) - std::lgamma(l1) -
                      std::log(static_cast<double>(n + l1));
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(lmag);
}

// Sum over n of alpha'_n gamma1^{eta'_n} Gamma(l2 - eta'_n, x) / Gamma(l2)
// with eta'_n = 2(n+l1)/eta. The shared building block of all three closed
// forms.
double gamma_tail_sum(double gamma1, double x, int l1, int l2, double eta) {
  double acc = 0.0;
  for (int n = 0; n <= l2 - l1 - 1; ++n) {
    const double ep = 2.0 * (n + l1) / eta;
    const double s = l2 - ep;  // positive for eta > 2
    const double upper = specfun::gamma_q(s, x) * std::tgamma(s);
    acc += alpha_prime_over_gamma_l2(n, l1, l2) * std::pow(gamma1, ep) * upper;
  }
  return acc;
}

double reg_lower(int l2, double x) { return specfun::gamma_p(static_cast<double>(l2), x); }

}  // namespace

std::array<double, 3> DistortionModel::levels() const {
  return {sigma2, sigma2 * std::exp2(-2.0 * rate_source_1),
          sigma2 * std::exp2(-2.0 * (rate_source_1 + rate_source_2))};
}

double gamma_coeff(double rate_bits, int dof, double eta) {
  if (!(rate_bits > 0.0)) throw std::domain_error("gamma_coeff: rate must be positive");
  if (!(eta > 2.0)) throw std::domain_error("gamma_coeff: eta must exceed 2");
  return (eta - 2.0) / (2.0 * specfun::qlb_rate_inverse(dof, rate_bits));
}

double p_layer1_success(double rate1_bits, int l1, int l2, double eta, int dof) {
  check_model(l1, l2, eta, "p_layer1_success");
  const double g1 = gamma_coeff(rate1_bits, dof, eta);
  const double p = reg_lower(l2, g1) + gamma_tail_sum(g1, g1, l1, l2, eta);
  return clamp_probability(p, "p_layer1_success");
}

double p_joint_ok1_fail2(double rate1_bits, double rate2_bits, int l1, int l2, double eta,
                         int dof) {
  check_model(l1, l2, eta, "p_joint_ok1_fail2");
  if (!(rate2_bits > 0.0)) throw std::domain_error("p_joint_ok1_fail2: rate2 must be positive");
  const double g1 = gamma_coeff(rate1_bits, dof, eta);
  const double g2 = gamma_coeff(rate2_bits, dof, eta);
  double p;
  if (rate1_bits >= rate2_bits) {
    p = gamma_tail_sum(g1, g2, l1, l2, eta);
  } else {
    p = reg_lower(l2, g1) - reg_lower(l2, g2) + gamma_tail_sum(g1, g1, l1, l2, eta);
  }
  return clamp_probability(p, "p_joint_ok1_fail2");
}

double p_joint_ok1_ok2(double rate1_bits, double rate2_bits, int l1, int l2, double eta, int dof) {
  check_model(l1, l2, eta, "p_joint_ok1_ok2");
  if (!(rate2_bits > 0.0)) throw std::domain_error("p_joint_ok1_ok2: rate2 must be positive");
  const double g1 = gamma_coeff(rate1_bits, dof, eta);
  const double g2 = gamma_coeff(rate2_bits, dof, eta);
  double p;
  if (rate1_bits >= rate2_bits) {
    p = reg_lower(l2, g1) - gamma_tail_sum(g1, g2, l1, l2, eta) +
        gamma_tail_sum(g1, g1, l1, l2, eta);
  } else {
    p = reg_lower(l2, g2);
  }
  return clamp_probability(p, "p_joint_ok1_ok2");
}

DecodingProbabilities decoding_probabilities(double rate1_bits, double rate2_bits,
                                             const SystemParams& params) {
  params.validate();
  const int l1 = params.layers[0].diversity;
  const int l2 = params.layers[1].diversity;
  const double eta = params.pathloss_eta;
  const int dof = params.zf_dof();

  DecodingProbabilities out;
  if (l1 == l2) {
    // Off-model degenerate case: both layers gated by the same distance.
    const double g1 = gamma_coeff(rate1_bits, dof, eta);
    const double g2 = gamma_coeff(rate2_bits, dof, eta);
    const double ok1 = reg_lower(l2, g1);
    const double both = reg_lower(l2, std::min(g1, g2));
    out.p_none = clamp_probability(1.0 - ok1, "decoding_probabilities");
    out.p_both = clamp_probability(both, "decoding_probabilities");
    out.p_layer1_only = clamp_probability(ok1 - both, "decoding_probabilities");
  } else {
    const double ok1 = p_layer1_success(rate1_bits, l1, l2, eta, dof);
    out.p_none = clamp_probability(1.0 - ok1, "decoding_probabilities");
    out.p_layer1_only = p_joint_ok1_fail2(rate1_bits, rate2_bits, l1, l2, eta, dof);
    out.p_both = p_joint_ok1_ok2(rate1_bits, rate2_bits, l1, l2, eta, dof);
  }
  const double total = out.p_none + out.p_layer1_only + out.p_both;
  if (std::fabs(total - 1.0) > 1e-10)
    throw std::runtime_error("decoding_probabilities: simplex sum deviates by " +
                             std::to_string(total - 1.0));
  return out;
}

double average_distortion(const DecodingProbabilities& probs, double rate_source_1,
                          double rate_source_2, double sigma2) {
  if (!(rate_source_1 > 0.0) || !(rate_source_2 > 0.0))
    throw std::domain_error("average_distortion: source rates must be positive");
  const DistortionModel model{sigma2, rate_source_1, rate_source_2};
  const auto levels = model.levels();
  return probs.p_none * levels[0] + probs.p_layer1_only * levels[1] + probs.p_both * levels[2];
}

double average_distortion_at(double rate1_bits, double rate2_bits, const SystemParams& params) {
  const DecodingProbabilities probs = decoding_probabilities(rate1_bits, rate2_bits, params);
  return average_distortion(probs, params.layers[0].rate_source, params.layers[1].rate_source,
                            params.source_variance);
}

DecodingProbabilities quadrature_probabilities(double rate1_bits, double rate2_bits, int l1,
                                               int l2, double eta, int dof, double lambda) {
  check_model(l1, l2, eta, "quadrature_probabilities");
  if (!(rate1_bits > 0.0) || !(rate2_bits > 0.0))
    throw std::domain_error("quadrature_probabilities: rates must be positive");
  if (!(lambda > 0.0)) throw std::domain_error("quadrature_probabilities: lambda must be positive");

  const double sir1 = specfun::qlb_rate_inverse(dof, rate1_bits);
  const double a = std::sqrt((eta - 2.0) / (2.0 * kPi * lambda * sir1));
  const double rhat2 = phy::threshold_r_l2(rate2_bits, eta, lambda, dof);

  // Outer cut where the L2-th distance density tail drops below 1e-12.
  double xtail = static_cast<double>(l2);
  while (specfun::gamma_q(static_cast<double>(l2), xtail) > 1e-12) xtail *= 1.5;
  const double vmax = std::sqrt(xtail / (kPi * lambda));

  const auto ok1_given_v = [&](double v) {
    const double rhat1 = phy::threshold_r_l1(rate1_bits, v, eta, lambda, dof);
    return geometry::conditional_distance_cdf(l1, l2, std::min(v, rhat1), v);
  };
  const auto integrand = [&](double v) {
    return geometry::nth_distance_pdf(l2, lambda, v) * ok1_given_v(v);
  };

  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto integrate = [&](double lo, double hi) {
    if (hi <= lo) return 0.0;
    // Split at the conditional case boundary so each panel is smooth.
    std::vector<double> cuts{lo};
    if (a > lo && a < hi) cuts.push_back(a);
    cuts.push_back(hi);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      acc += Quad::integrate(integrand, cuts[i], cuts[i + 1], 12, 1e-12);
    return acc;
  };

  DecodingProbabilities out;
  const double ok1 = integrate(0.0, vmax);
  out.p_none = clamp_probability(1.0 - ok1, "quadrature_probabilities");
  out.p_layer1_only = clamp_probability(integrate(std::min(rhat2, vmax), vmax),
                                        "quadrature_probabilities");
  out.p_both = clamp_probability(integrate(0.0, std::min(rhat2, vmax)),
                                 "quadrature_probabilities");
  return out;
}

McProbabilities mc_probabilities(double rate1_bits, double rate2_bits, const SystemParams& params,
                                 long draws, std::uint64_t seed, int threads) {
  params.validate();
  if (!(rate1_bits > 0.0) || !(rate2_bits > 0.0))
    throw std::domain_error("mc_probabilities: rates must be positive");
  if (draws < 1) throw std::invalid_argument("mc_probabilities: draws must be >= 1");
  if (threads < 1) threads = 1;

  const int l1 = params.layers[0].diversity;
  const int l2 = params.layers[1].diversity;
  const double eta = params.pathloss_eta;
  const double lambda = params.density_lambda;
  const int dof = params.zf_dof();
  const double rhat2 = phy::threshold_r_l2(rate2_bits, eta, lambda, dof);
  const double radius = geometry::min_window_radius(lambda, l2 + 20, 1e-6);

  constexpr long kChunk = 512;
  const long n_chunks = (draws + kChunk - 1) / kChunk;
  struct Counts {
    long none = 0;
    long l1_only = 0;
    long both = 0;
    long n = 0;
  };
  std::vector<Counts> counts(n_chunks);

  auto run_chunk = [&](long chunk) {
    const long begin = chunk * kChunk;
    const long count = std::min(kChunk, draws - begin);
    Counts c;
    for (long i = 0; i < count; ++i) {
      const auto phi = geometry::sample_ppp(
          lambda, radius, rng::derive_stream(seed, static_cast<std::uint64_t>(begin + i)));
      if (static_cast<int>(phi.distances.size()) < l2) {
        ++c.none;  // window starved (probability < 1e-6 by construction)
        ++c.n;
        continue;
      }
      const double u = phi.distances[l1 - 1];
      const double v = phi.distances[l2 - 1];
      const bool ok2 = v < rhat2;
      const bool ok1 = (l1 == l2) ? (v < phy::threshold_r_l2(rate1_bits, eta, lambda, dof))
                                  : (u < phy::threshold_r_l1(rate1_bits, v, eta, lambda, dof));
      if (!ok1)
        ++c.none;
      else if (!ok2)
        ++c.l1_only;
      else
        ++c.both;
      ++c.n;
    }
    counts[chunk] = c;
  };

  if (threads == 1) {
    for (long chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<long> next{0};
    std::vector<std::future<void>> pool;
    for (int t = 0; t < threads; ++t)
      pool.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const long chunk = next.fetch_add(1);
          if (chunk >= n_chunks) return;
          run_chunk(chunk);
        }
      }));
    for (auto& f : pool) f.get();
  }

  Counts total;
  for (const Counts& c : counts) {
    total.none += c.none;
    total.l1_only += c.l1_only;
    total.both += c.both;
    total.n += c.n;
  }
  McProbabilities out;
  out.draws = total.n;
  const double n = static_cast<double>(total.n);
  out.probs.p_none = total.none / n;
  out.probs.p_layer1_only = total.l1_only / n;
  out.probs.p_both = total.both / n;
  const auto se = [n](double p) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n); };
  out.std_error = {se(out.probs.p_none), se(out.probs.p_layer1_only), se(out.probs.p_both)};
  return out;
}

}  // namespace ccl::distortion
