#include "ccl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ccl/coded_caching.hpp"
#include "ccl/distortion_analysis.hpp"
#include "ccl/rng.hpp"

namespace ccl::optim {

namespace {

constexpr double kDistortionSlack = 1e-6;

struct LayerWeights {
  double rhat1;  // normalized source rates
  double rhat2;
};

LayerWeights normalized_rates(const SystemParams& p) {
  const double total = p.layers[0].rate_source + p.layers[1].rate_source;
  return {p.layers[0].rate_source / total, p.layers[1].rate_source / total};
}

// Projection of the stationary split back onto the box while keeping the
// cache budget equality exact: clamp the violating coordinate, re-solve the
// other from the constraint, fall back to the nearest feasible vertex.
std::pair<double, double> project_split(double mu1, double mu2, const SystemParams& p) {
  const LayerWeights w = normalized_rates(p);
  const double budget = p.cache_fraction;
  const auto solve_other = [&](double fixed, bool fixed_is_first) {
    return fixed_is_first ? (budget - fixed * w.rhat1) / w.rhat2
                          : (budget - fixed * w.rhat2) / w.rhat1;
  };
  const auto in_box = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (in_box(mu1) && in_box(mu2)) return {mu1, mu2};

  for (const bool first : {true, false}) {
    const double raw = first ? mu1 : mu2;
    if (in_box(raw)) continue;
    const double clamped = std::min(1.0, std::max(0.0, raw));
    const double other = solve_other(clamped, first);
    if (in_box(other)) return first ? std::make_pair(clamped, other)
                                    : std::make_pair(other, clamped);
  }
  // Nearest feasible vertex of the constraint segment inside the box.
  std::vector<std::pair<double, double>> vertices;
  for (const double m1 : {0.0, 1.0}) {
    const double m2 = solve_other(m1, true);
    if (in_box(m2)) vertices.emplace_back(m1, m2);
  }
  for (const double m2 : {0.0, 1.0}) {
    const double m1 = solve_other(m2, false);
    if (in_box(m1)) vertices.emplace_back(m1, m2);
  }
  if (vertices.empty())
    throw std::domain_error("cache_split: cache budget incompatible with [0,1] splits");
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> pick = vertices.front();
  for (const auto& [m1, m2] : vertices) {
    const double d = (m1 - mu1) * (m1 - mu1) + (m2 - mu2) * (m2 - mu2);
    if (d < best) {
      best = d;
      pick = {m1, m2};
    }
  }
  return pick;
}

OptimizationState make_state(double r1, double r2, double m1, double m2,
                             const SystemParams& params, int iter) {
  OptimizationState s;
  s.rate1 = r1;
  s.rate2 = r2;
  s.mu1 = m1;
  s.mu2 = m2;
  s.latency = latency_at(r1, r2, m1, m2, params);
  s.distortion = distortion::average_distortion_at(r1, r2, params);
  s.iteration = iter;
  return s;
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 2) throw std::invalid_argument("PsoConfig: swarm_size must be >= 2");
  if (max_iters < 1) throw std::invalid_argument("PsoConfig: max_iters must be >= 1");
  if (!(rate_min > 0.0) || !(rate_max > rate_min))
    throw std::invalid_argument("PsoConfig: need 0 < rate_min < rate_max");
  if (!(penalty_weight > 0.0)) throw std::invalid_argument("PsoConfig: penalty_weight must be positive");
  if (!(inertia > 0.0) || !(cognitive >= 0.0) || !(social >= 0.0))
    throw std::invalid_argument("PsoConfig: nonpositive dynamics coefficients");
}

double distortion_floor(const SystemParams& params) {
  return params.source_variance *
         std::exp2(-2.0 * (params.layers[0].rate_source + params.layers[1].rate_source));
}

double latency_at(double rate1, double rate2, double mu1, double mu2,
                  const SystemParams& params) {
  std::array<LayerSpec, 2> layers = params.layers;
  layers[0].rate_channel = rate1;
  layers[1].rate_channel = rate2;
  layers[0].cache_fraction = mu1;
  layers[1].cache_fraction = mu2;
  return caching::delivery_latency(layers, params);
}

std::pair<double, double> cache_split_closed_form(double rate1, double rate2,
                                                  const SystemParams& params) {
  params.validate();
  if (!(rate1 > 0.0) || !(rate2 > 0.0))
    throw std::domain_error("cache_split_closed_form: rates must be positive");
  const double k = static_cast<double>(params.n_users);
  const LayerWeights w = normalized_rates(params);
  const double a1 = params.layers[0].rate_source / (rate1 * params.layers[0].diversity);
  const double a2 = params.layers[1].rate_source / (rate2 * params.layers[1].diversity);
  const double denom = std::sqrt(a1 * w.rhat1) + std::sqrt(a2 * w.rhat2);
  const double scale = (1.0 + k * params.cache_fraction) / denom;
  const double mu1 = (scale * std::sqrt(a1 / w.rhat1) - 1.0) / k;
  const double mu2 = (scale * std::sqrt(a2 / w.rhat2) - 1.0) / k;
  return project_split(mu1, mu2, params);
}

std::pair<double, double> pso_minimize_2d(const Pso2dProblem& problem, const PsoConfig& pso) {
  pso.validate();
  const auto fitness = [&](double x, double y, double& excess_out) {
    excess_out = problem.excess(x, y);
    return problem.objective(x, y) + pso.penalty_weight * excess_out * excess_out;
  };

  std::mt19937_64 gen(pso.seed);
  const int n = pso.swarm_size;
  std::vector<double> x1(n), x2(n), v1(n), v2(n), best1(n), best2(n), best_fit(n);
  double gbest1 = pso.rate_min;
  double gbest2 = pso.rate_min;
  double gbest_fit = std::numeric_limits<double>::infinity();
  // Best strictly feasible point ever seen; this is what gets returned.
  double fbest1 = 0.0;
  double fbest2 = 0.0;
  double fbest_obj = std::numeric_limits<double>::infinity();
  bool have_feasible = false;

  const auto consider = [&](double x, double y, double f, double excess) {
    if (f < gbest_fit) {
      gbest_fit = f;
      gbest1 = x;
      gbest2 = y;
    }
    if (excess <= problem.slack) {
      const double obj = problem.objective(x, y);
      if (!have_feasible || obj < fbest_obj) {
        have_feasible = true;
        fbest_obj = obj;
        fbest1 = x;
        fbest2 = y;
      }
    }
  };

  const double span = pso.rate_max - pso.rate_min;
  for (int i = 0; i < n; ++i) {
    x1[i] = pso.rate_min + span * rng::uniform01(gen);
    x2[i] = pso.rate_min + span * rng::uniform01(gen);
    v1[i] = span * (rng::uniform01(gen) - 0.5);
    v2[i] = span * (rng::uniform01(gen) - 0.5);
    double excess;
    const double f = fitness(x1[i], x2[i], excess);
    best1[i] = x1[i];
    best2[i] = x2[i];
    best_fit[i] = f;
    consider(x1[i], x2[i], f, excess);
  }

  for (int iter = 0; iter < pso.max_iters; ++iter) {
    for (int i = 0; i < n; ++i) {
      const double rc1 = rng::uniform01(gen);
      const double rc2 = rng::uniform01(gen);
      const double rs1 = rng::uniform01(gen);
      const double rs2 = rng::uniform01(gen);
      v1[i] = pso.inertia * v1[i] + pso.cognitive * rc1 * (best1[i] - x1[i]) +
              pso.social * rs1 * (gbest1 - x1[i]);
      v2[i] = pso.inertia * v2[i] + pso.cognitive * rc2 * (best2[i] - x2[i]) +
              pso.social * rs2 * (gbest2 - x2[i]);
      x1[i] = std::clamp(x1[i] + v1[i], pso.rate_min, pso.rate_max);
      x2[i] = std::clamp(x2[i] + v2[i], pso.rate_min, pso.rate_max);
      double excess;
      const double f = fitness(x1[i], x2[i], excess);
      if (f < best_fit[i]) {
        best_fit[i] = f;
        best1[i] = x1[i];
        best2[i] = x2[i];
      }
      consider(x1[i], x2[i], f, excess);
    }
  }

  if (!have_feasible)
    throw std::runtime_error("pso_minimize_2d: no feasible point found");
  return {fbest1, fbest2};
}

std::pair<double, double> pso_minimize_rates(double mu1, double mu2, double d0,
                                             const SystemParams& params, const PsoConfig& pso) {
  params.validate();
  pso.validate();
  const double floor = distortion_floor(params);
  if (!(d0 > floor))
    throw InfeasibleTarget("pso_minimize_rates: target distortion " + std::to_string(d0) +
                           " is at or below the attainable floor " + std::to_string(floor));
  // The distortion is nondecreasing in both rates, so the corner at
  // (rate_min, rate_min) attains the box minimum; fail fast if even that
  // violates the target.
  const double d_corner = distortion::average_distortion_at(pso.rate_min, pso.rate_min, params);
  if (d_corner > d0 + kDistortionSlack)
    throw InfeasibleTarget(
        "pso_minimize_rates: target distortion unreachable within the rate bounds (floor at "
        "rate_min is " +
        std::to_string(d_corner) + ")");

  Pso2dProblem problem;
  problem.objective = [&, mu1, mu2](double r1, double r2) {
    return latency_at(r1, r2, mu1, mu2, params);
  };
  problem.excess = [&](double r1, double r2) {
    return std::max(0.0, distortion::average_distortion_at(r1, r2, params) - d0);
  };
  problem.slack = kDistortionSlack;
  return pso_minimize_2d(problem, pso);
}

OptimizeResult alternate_optimize(const SystemParams& params, double d0, int n_outer,
                                  const PsoConfig& pso) {
  params.validate();
  pso.validate();
  if (n_outer < 1) throw std::invalid_argument("alternate_optimize: n_outer must be >= 1");

  double mu1 = params.cache_fraction;
  double mu2 = params.cache_fraction;
  OptimizeResult result;
  OptimizationState best;
  best.latency = std::numeric_limits<double>::infinity();
  const auto record = [&](const OptimizationState& state) {
    result.trace.push_back(state);
    if (state.distortion <= d0 + kDistortionSlack && state.latency < best.latency) best = state;
  };

  double last_r1 = 0.0;
  double last_r2 = 0.0;
  int iters_run = 0;
  for (int t = 1; t <= n_outer; ++t) {
    PsoConfig step = pso;
    step.seed = rng::derive_stream(pso.seed, static_cast<std::uint64_t>(t));
    const auto [r1, r2] = pso_minimize_rates(mu1, mu2, d0, params, step);
    const double prev_best = best.latency;
    record(make_state(r1, r2, mu1, mu2, params, t));
    last_r1 = r1;
    last_r2 = r2;
    iters_run = t;

    const auto [next1, next2] = cache_split_closed_form(r1, r2, params);
    mu1 = next1;
    mu2 = next2;
    if (std::isfinite(prev_best) &&
        std::fabs(prev_best - best.latency) / std::max(best.latency, 1e-300) < 1e-4)
      break;
  }
  // The closing cache step reuses the last rates; the distortion does not
  // depend on the split, so feasibility carries over.
  record(make_state(last_r1, last_r2, mu1, mu2, params, iters_run));
  if (!std::isfinite(best.latency))
    throw std::runtime_error("alternate_optimize: no feasible state produced");
  result.best = best;
  return result;
}

OptimizationState uniform_baseline(const SystemParams& params, double d0, const PsoConfig& pso) {
  params.validate();
  pso.validate();
  PsoConfig step = pso;
  step.seed = rng::derive_stream(pso.seed, 1);  // same stream as outer iteration 1
  const double mu = params.cache_fraction;
  const auto [r1, r2] = pso_minimize_rates(mu, mu, d0, params, step);
  return make_state(r1, r2, mu, mu, params, 1);
}

double delta_latency(double t_uniform, double t_optimized) {
  if (!(t_optimized > 0.0)) throw std::domain_error("delta_latency: optimized latency must be positive");
  return (t_uniform - t_optimized) / t_optimized;
}

}  // namespace ccl::optim
