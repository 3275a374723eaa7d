// Release acceptance suite: every criterion prints one [PASS]/[FAIL] line
// with its measured figure and tolerance; the process exits nonzero if any
// criterion fails. Always compiled with assertions active.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccl/coded_caching.hpp"
#include "ccl/distortion_analysis.hpp"
#include "ccl/optimizer.hpp"
#include "ccl/phy_link.hpp"
#include "ccl/rng.hpp"
#include "ccl/special_math.hpp"
#include "ccl/stochastic_geometry.hpp"
#include "commands.hpp"
#include "oracles.hpp"
#include "scenario.hpp"

namespace {

using namespace ccl;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok;
  std::string detail;
};

double rel(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// --------------------------------------------------------------------------
// 1. Special-function fidelity against a high-order Gauss-Laguerre rule.

Outcome criterion_special_functions(const cli::ScenarioConfig&) {
  constexpr int kOracleNodes = 12800;
  double worst = 0.0;
  std::string worst_at;
  for (int dof = 1; dof <= 8; ++dof) {
    for (int i = 0; i < 49; ++i) {
      const double mu = 1e-3 * std::pow(1e6, i / 48.0);
      const double got = specfun::mean_log1p_gamma(dof, mu);
      const double want = test::gl_log_moment(kOracleNodes, dof, mu);
      const double r = rel(got, want);
      if (r > worst) {
        worst = r;
        worst_at = "(dof=" + std::to_string(dof) + ", scale=" + fmt(mu) + ")";
      }
    }
  }
  return {worst <= 1e-8, "worst rel err " + fmt(worst, 3) + " at " + worst_at + ", tol 1e-8"};
}

// --------------------------------------------------------------------------
// 2. Probability closed forms against the quadrature oracle on a 5x5 grid.

Outcome criterion_probability_quadrature(const cli::ScenarioConfig& cfg) {
  const SystemParams& sys = cfg.system;
  const int l1 = sys.layers[0].diversity;
  const int l2 = sys.layers[1].diversity;
  const double eta = sys.pathloss_eta;
  const int dof = sys.zf_dof();
  const std::vector<double> grid{0.6, 1.0, 1.4, 1.9, 2.5};

  double worst = 0.0;
  for (const double r1 : grid) {
    for (const double r2 : grid) {
      const auto closed = distortion::decoding_probabilities(r1, r2, sys);
      const auto quad = distortion::quadrature_probabilities(r1, r2, l1, l2, eta, dof);
      worst = std::max({worst, rel(closed.p_none, quad.p_none),
                        rel(closed.p_layer1_only, quad.p_layer1_only),
                        rel(closed.p_both, quad.p_both)});
    }
  }

  // Case-boundary continuity: both joint probabilities approached from both
  // sides of equal rates.
  double jump = 0.0;
  for (const double r : grid) {
    const double d = 1e-12 * r;
    jump = std::max(jump,
                    std::fabs(distortion::p_joint_ok1_fail2(r + d, r, l1, l2, eta, dof) -
                              distortion::p_joint_ok1_fail2(r - d, r, l1, l2, eta, dof)));
    jump = std::max(jump, std::fabs(distortion::p_joint_ok1_ok2(r + d, r, l1, l2, eta, dof) -
                                    distortion::p_joint_ok1_ok2(r - d, r, l1, l2, eta, dof)));
  }
  const bool ok = worst <= 1e-6 && jump <= 1e-10;
  return {ok, "worst rel err " + fmt(worst, 3) + " (tol 1e-6), case-boundary jump " +
                  fmt(jump, 3) + " (tol 1e-10)"};
}

// --------------------------------------------------------------------------
// 3. Probability closed forms against geometry-level Monte Carlo, plus the
//    density-independence z-test.

Outcome criterion_probability_monte_carlo(const cli::ScenarioConfig& cfg) {
  const SystemParams& sys = cfg.system;
  const long draws = 100000;
  const std::uint64_t seed = cfg.monte_carlo.seed;
  const std::vector<std::pair<double, double>> pairs{
      {1.5, 1.0}, {0.8, 1.6}, {1.0, 1.0}, {2.0, 2.0}, {0.5, 3.0}};

  double worst_sigma = 0.0;
  double worst_z = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [r1, r2] = pairs[k];
    const auto closed = distortion::decoding_probabilities(r1, r2, sys);
    const auto mc = distortion::mc_probabilities(r1, r2, sys, draws, seed + k, 4);
    worst_sigma = std::max(
        {worst_sigma,
         std::fabs(mc.probs.p_none - closed.p_none) / std::max(mc.std_error[0], 1e-12),
         std::fabs(mc.probs.p_layer1_only - closed.p_layer1_only) /
             std::max(mc.std_error[1], 1e-12),
         std::fabs(mc.probs.p_both - closed.p_both) / std::max(mc.std_error[2], 1e-12)});

    SystemParams sparse = sys;
    sparse.density_lambda = 0.5;
    SystemParams dense = sys;
    dense.density_lambda = 2.0;
    const auto a = distortion::mc_probabilities(r1, r2, sparse, draws, seed + 100 + k, 4);
    const auto b = distortion::mc_probabilities(r1, r2, dense, draws, seed + 200 + k, 4);
    const double pa[3] = {a.probs.p_none, a.probs.p_layer1_only, a.probs.p_both};
    const double pb[3] = {b.probs.p_none, b.probs.p_layer1_only, b.probs.p_both};
    for (int i = 0; i < 3; ++i) {
      const double pooled = 0.5 * (pa[i] + pb[i]);
      const double se = std::sqrt(std::max(pooled * (1.0 - pooled) * (2.0 / draws), 1e-30));
      worst_z = std::max(worst_z, std::fabs(pa[i] - pb[i]) / se);
    }
  }
  const bool ok = worst_sigma <= 3.0 && worst_z <= 2.5758293035489004;
  return {ok, "worst deviation " + fmt(worst_sigma, 3) + " std errs (tol 3); density z " +
                  fmt(worst_z, 3) + " (crit 2.576)"};
}

// --------------------------------------------------------------------------
// 4. Post-zero-forcing gain statistics (Kolmogorov-Smirnov at alpha 0.01).

Outcome criterion_pzf_statistics(const cli::ScenarioConfig& cfg) {
  const int n_antennas = cfg.system.n_antennas;
  const int l2 = cfg.system.layers[1].diversity;
  const int dof = cfg.system.zf_dof();
  const long draws = 100000;
  std::mt19937_64 gen(rng::derive_stream(cfg.monte_carlo.seed, 0x5A5A5A5AULL));

  std::vector<double> gains;
  gains.reserve(draws);
  Eigen::MatrixXcd h(n_antennas, l2);
  for (long i = 0; i < draws; ++i) {
    for (int c = 0; c < l2; ++c)
      for (int r = 0; r < n_antennas; ++r) {
        double x, y;
        rng::normal_pair(gen, x, y);
        h(r, c) = std::complex<double>(x * M_SQRT1_2, y * M_SQRT1_2);
      }
    gains.push_back(phy::pzf_signal_gains(h)(0));
  }
  std::sort(gains.begin(), gains.end());
  double d_stat = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double f = specfun::gamma_p(dof, gains[i]);
    d_stat = std::max({d_stat, std::fabs(f - static_cast<double>(i) / draws),
                       std::fabs(f - static_cast<double>(i + 1) / draws)});
  }
  const double crit = 1.6276 / std::sqrt(static_cast<double>(draws));
  return {d_stat <= crit,
          "KS D " + fmt(d_stat, 4) + " vs crit " + fmt(crit, 4) + " (Gamma(" +
              std::to_string(dof) + ",1), alpha 0.01)"};
}

// --------------------------------------------------------------------------
// 5. Coded caching and erasure code exactness.

Outcome criterion_caching_exactness(const cli::ScenarioConfig&) {
  std::mt19937_64 gen(0xC0DEC0DEULL);
  long decoded = 0;

  for (int k = 1; k <= 6; ++k) {
    for (int t = 0; t <= k; ++t) {
      caching::CachingConfig cc;
      cc.num_users = k;
      cc.num_files = std::max(2, k - 1);
      cc.cache_param = t;
      cc.diversity = 2;
      cc.layer_bits = caching::binomial(k, t) * 2 * 5;  // aligned: length must be exact
      const auto lib = [&] {
        std::vector<caching::BitVec> v;
        for (int f = 0; f < cc.num_files; ++f)
          v.push_back(caching::BitVec::random(cc.layer_bits, gen));
        return v;
      }();
      std::vector<int> demands(k);
      for (int u = 0; u < k; ++u) demands[u] = static_cast<int>(gen() % cc.num_files);
      const auto caches = caching::place(cc, lib);
      const auto cw = caching::deliver(cc, lib, demands);
      const double closed = caching::codeword_length_bits(
          static_cast<double>(cc.layer_bits), 1.0, k, static_cast<double>(t) / k);
      if (static_cast<double>(cw.blocks.size()) * static_cast<double>(cw.block_bits) != closed)
        return {false, "delivered bits mismatch at K=" + std::to_string(k) +
                           ", t=" + std::to_string(t)};
      for (int u = 0; u < k; ++u) {
        if (!(caching::decode_user(u, cc, caches[u], cw, demands) == lib[demands[u]]))
          return {false, "user decode mismatch at K=" + std::to_string(k) +
                             ", t=" + std::to_string(t)};
        ++decoded;
      }
    }
  }

  // Erasure code: every k-subset reconstructs, every (k-1)-subset throws.
  long subsets_ok = 0;
  for (int n = 1; n <= 8; ++n) {
    for (int kd = 1; kd <= n; ++kd) {
      const caching::MdsCode code{n, kd};
      std::vector<caching::BitVec> data;
      for (int i = 0; i < kd; ++i) data.push_back(caching::BitVec::random(512, gen));
      const auto blocks = caching::mds_encode(data, code);
      std::vector<int> pick(kd);
      const std::function<bool(int, int)> try_all = [&](int start, int depth) -> bool {
        if (depth == kd) {
          std::vector<caching::BitVec> got;
          for (int i = 0; i < kd; ++i) got.push_back(blocks[pick[i]]);
          if (!(caching::mds_decode(pick, got, code) == data)) return false;
          ++subsets_ok;
          return true;
        }
        for (int v = start; v < n; ++v) {
          pick[depth] = v;
          if (!try_all(v + 1, depth + 1)) return false;
        }
        return true;
      };
      if (!try_all(0, 0))
        return {false, "erasure decode mismatch at n=" + std::to_string(n) +
                           ", k=" + std::to_string(kd)};
      if (kd >= 1) {
        std::vector<int> short_pick(kd - 1);
        for (int i = 0; i + 1 < kd; ++i) short_pick[i] = i;
        std::vector<caching::BitVec> got;
        for (const int i : short_pick) got.push_back(blocks[i]);
        bool threw = false;
        try {
          caching::mds_decode(short_pick, got, code);
        } catch (const std::invalid_argument&) {
          threw = true;
        }
        if (!threw)
          return {false, "short erasure set did not fail at n=" + std::to_string(n) +
                             ", k=" + std::to_string(kd)};
      }
    }
  }
  return {true, std::to_string(decoded) + " user decodes bit-exact, " +
                    std::to_string(subsets_ok) + " erasure subsets reconstructed"};
}

// --------------------------------------------------------------------------
// 6. Closed-form cache split against dense constrained grid search.

Outcome criterion_cache_split(const cli::ScenarioConfig& cfg) {
  // Symmetric instance returns the uniform split exactly.
  SystemParams sym = cfg.system;
  sym.layers[0] = {1.5, 3, 0.3, 1.2};
  sym.layers[1] = {1.5, 3, 0.3, 1.2};
  const auto [s1, s2] = optim::cache_split_closed_form(1.2, 1.2, sym);
  if (s1 != s2 || std::fabs(s1 - sym.cache_fraction) > 1e-15)
    return {false, "symmetric split not exact: (" + fmt(s1, 17) + ", " + fmt(s2, 17) + ")"};

  test::TestRng rng(20240901);
  int tested = 0;
  double worst = 0.0;
  while (tested < 100) {
    SystemParams q = cfg.system;
    q.n_users = rng.uniform_int(4, 40);
    q.cache_fraction = rng.uniform(0.05, 0.9);
    q.layers[0].rate_source = rng.uniform(0.5, 3.0);
    q.layers[1].rate_source = rng.uniform(0.5, 3.0);
    q.layers[0].diversity = rng.uniform_int(1, 4);
    q.layers[1].diversity = std::min(rng.uniform_int(q.layers[0].diversity, 6), q.n_antennas);
    const double r1 = rng.uniform(0.2, 4.0);
    const double r2 = rng.uniform(0.2, 4.0);
    const auto [m1, m2] = optim::cache_split_closed_form(r1, r2, q);
    if (m1 <= 1e-4 || m1 >= 1.0 - 1e-4 || m2 <= 1e-4 || m2 >= 1.0 - 1e-4) continue;  // interior only
    ++tested;

    const double total = q.layers[0].rate_source + q.layers[1].rate_source;
    const double w1 = q.layers[0].rate_source / total;
    const double w2 = q.layers[1].rate_source / total;
    double g1 = 0.0, g2 = 0.0, best = 1e300;
    for (double c1 = 0.0; c1 <= 1.0 + 1e-12; c1 += 1e-4) {
      const double c2 = (q.cache_fraction - c1 * w1) / w2;
      if (c2 < 0.0 || c2 > 1.0) continue;
      const double lat = optim::latency_at(r1, r2, c1, c2, q);
      if (lat < best) {
        best = lat;
        g1 = c1;
        g2 = c2;
      }
    }
    worst = std::max({worst, std::fabs(m1 - g1), std::fabs(m2 - g2)});
  }
  return {worst <= 1e-3,
          "100 interior tuples, worst |closed - grid| " + fmt(worst, 3) + " (tol 1e-3)"};
}

// --------------------------------------------------------------------------
// 7. Distortion level-set structure through the command-line surface.

Outcome criterion_levelset_structure(const cli::ScenarioConfig& cfg) {
  cli::ScenarioConfig local = cfg;
  local.levelset.rate_min = 0.1;
  local.levelset.rate_max = 3.0;
  local.levelset.num_points = 50;
  cli::GlobalOptions opt;
  opt.out_path = "acceptance_levelset.csv";
  std::ostringstream sink;
  if (cli::cmd_levelset(local, opt, sink) != 0) return {false, "levelset command failed"};

  std::ifstream in(opt.out_path);
  if (!in) return {false, "missing levelset CSV"};
  std::string line;
  std::getline(in, line);
  if (line != "rate1,rate2,distortion") return {false, "unexpected CSV header: " + line};
  const int n = local.levelset.num_points;
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  int rows = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    d[rows / n][rows % n] = std::stod(line.substr(c2 + 1));
    ++rows;
  }
  if (rows != n * n) return {false, "row count " + std::to_string(rows)};

  const double floor = 0.015625;  // rates (1,2) bits/sample
  const double boundary = 0.25;
  double dmin = 1e300, dmax = -1e300;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = d[i][j];
      dmin = std::min(dmin, v);
      dmax = std::max(dmax, v);
      if (v < floor - 1e-12 || v > 1.0 + 1e-12)
        return {false, "distortion outside [2^-6, 1]: " + fmt(v, 8)};
      if (j > 0 && d[i][j] < d[i][j - 1] - 1e-12) return {false, "not monotone in rate2"};
      if (i > 0 && d[i][j] < d[i - 1][j] - 1e-12) return {false, "not monotone in rate1"};
    }
  if (!(dmin < boundary && dmax > boundary))
    return {false, "grid does not straddle the region boundary"};

  // The layer-2-lost limit: for every rate1, letting rate2 blow up floors the
  // distortion at the region boundary 2^{-2 Rs1} = 0.25, approached as
  // rate1 -> 0.
  for (int i = 0; i < n; ++i) {
    const double r1 = local.levelset.rate_min +
                      (local.levelset.rate_max - local.levelset.rate_min) * i / (n - 1);
    const double v = distortion::average_distortion_at(r1, 1e6, cfg.system);
    if (v < boundary - 1e-9) return {false, "layer-2-lost distortion dips below the boundary"};
  }
  const double at_limit = distortion::average_distortion_at(1e-6, 1e6, cfg.system);
  if (std::fabs(at_limit - boundary) > 1e-3)
    return {false, "boundary limit " + fmt(at_limit, 6) + " != 0.25"};

  return {true, "floor " + fmt(dmin, 4) + " >= 2^-6, boundary 0.25 witnessed, monotone on 50x50"};
}

// --------------------------------------------------------------------------
// 8. End-to-end optimization sweep: feasibility, no-loss, improvement band.

Outcome criterion_optimization_sweep(const cli::ScenarioConfig& cfg) {
  cli::GlobalOptions opt;
  opt.out_path = "acceptance_sweep.csv";
  std::ostringstream sink;
  if (cli::cmd_sweep(cfg, opt, sink) != 0) return {false, "sweep command failed"};

  std::ifstream in(opt.out_path);
  if (!in) return {false, "missing sweep CSV"};
  std::string line;
  std::getline(in, line);  // header
  const SystemParams& sys = cfg.system;
  const double total_rate = sys.layers[0].rate_source + sys.layers[1].rate_source;
  int rows = 0, in_band = 0;
  while (std::getline(in, line)) {
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() != 9) return {false, "malformed sweep row"};
    const double d0 = f[0];
    if (f[1] != 1.0) return {false, "infeasible row at d0=" + fmt(d0, 4)};
    const double r1 = f[2], r2 = f[3], m1 = f[4], m2 = f[5], t_opt = f[6], t_unif = f[7],
                 delta = f[8];
    ++rows;

    const double dist = distortion::average_distortion_at(r1, r2, sys);
    if (dist > d0 + 1e-6)
      return {false, "reported state violates the distortion target at d0=" + fmt(d0, 4)};
    const double budget = (m1 * sys.layers[0].rate_source + m2 * sys.layers[1].rate_source) /
                          total_rate;
    if (std::fabs(budget - sys.cache_fraction) > 1e-10)
      return {false, "cache budget violated at d0=" + fmt(d0, 4)};
    const double t_check = optim::latency_at(r1, r2, m1, m2, sys);
    if (rel(t_check, t_opt) > 1e-12)
      return {false, "latency column inconsistent at d0=" + fmt(d0, 4)};
    if (delta < -1e-3) return {false, "optimized run lost to uniform at d0=" + fmt(d0, 4)};
    if (rel((t_unif - t_opt) / t_opt, delta) > 1e-9)
      return {false, "delta column inconsistent at d0=" + fmt(d0, 4)};
    if (delta >= 0.02 && delta <= 0.20) ++in_band;
  }
  if (rows != cfg.sweep.num_points) return {false, "missing sweep rows"};
  const bool ok = 2 * in_band >= rows;
  return {ok, std::to_string(in_band) + "/" + std::to_string(rows) +
                  " sweep points inside the 2-20% improvement band (need at least half)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string scenario_path = "scenarios/default.json";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--scenario") scenario_path = argv[i + 1];

  cli::ScenarioConfig cfg;
  try {
    cfg = cli::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "cannot load scenario " << scenario_path << ": " << e.what() << "\n";
    return 2;
  }

  const std::vector<std::pair<std::string, std::function<Outcome(const cli::ScenarioConfig&)>>>
      criteria{
          {"1 special-function fidelity", criterion_special_functions},
          {"2 probabilities vs quadrature", criterion_probability_quadrature},
          {"3 probabilities vs Monte Carlo", criterion_probability_monte_carlo},
          {"4 zero-forcing gain statistics", criterion_pzf_statistics},
          {"5 coded caching + erasure exactness", criterion_caching_exactness},
          {"6 cache-split optimality", criterion_cache_split},
          {"7 distortion level-set structure", criterion_levelset_structure},
          {"8 end-to-end optimization sweep", criterion_optimization_sweep},
      };

  bool all_ok = true;
  for (const auto& [name, fn] : criteria) {
    const auto start = Clock::now();
    Outcome outcome{false, "exception"};
    try {
      outcome = fn(cfg);
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count() /
        1000.0;
    std::printf("[%s] criterion %s: %s (%.1fs)\n", outcome.ok ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.c_str(), secs);
    std::fflush(stdout);
    all_ok = all_ok && outcome.ok;
  }
  std::printf(all_ok ? "acceptance: ALL CRITERIA PASSED\n" : "acceptance: FAILURES PRESENT\n");
  return all_ok ? 0 : 1;
}
