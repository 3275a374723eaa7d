#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "ccl/phy_link.hpp"
#include "ccl/rng.hpp"
#include "ccl/special_math.hpp"
#include "ccl/stochastic_geometry.hpp"

using namespace ccl;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rel(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

Eigen::MatrixXcd random_channel(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::MatrixXcd h(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      double x, y;
      rng::normal_pair(gen, x, y);
      h(r, c) = std::complex<double>(x * M_SQRT1_2, y * M_SQRT1_2);
    }
  return h;
}

}  // namespace

TEST_SUITE("phy_link") {

TEST_CASE("local_average_sir pinned values") {
  CHECK(rel(phy::local_average_sir(1.0, 1.0, 4.0, 1.0 / kPi), 1.0) < 1e-14);
  for (const double r : {0.4, 1.0, 2.7}) {
    const double want = (3.75 - 2.0) / (2.0 * kPi * 1.3 * r * r);
    CHECK(rel(phy::local_average_sir(r, r, 3.75, 1.3), want) < 1e-13);
  }
  CHECK_THROWS_AS(phy::local_average_sir(2.0, 1.0, 3.75, 1.0), std::domain_error);
  CHECK_THROWS_AS(phy::local_average_sir(0.5, 1.0, 1.9, 1.0), std::domain_error);
}

TEST_CASE("ensemble-average interference matches the closed form") {
  // Paired per-geometry comparison of the summed pathloss beyond the 4th
  // node against 2 pi lambda (v^{2-eta} - R^{2-eta}) / (eta - 2).
  const double eta = 3.75;
  const double lambda = 1.0;
  const int l2 = 4;
  const double radius = 60.0;
  const int geoms = 4000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int g = 0; g < geoms; ++g) {
    const auto phi = geometry::sample_ppp(lambda, radius, rng::derive_stream(31337, g));
    if (static_cast<int>(phi.distances.size()) < l2 + 1) continue;
    const double v = phi.distances[l2 - 1];
    double interference = 0.0;
    for (std::size_t j = l2; j < phi.distances.size(); ++j)
      interference += std::pow(phi.distances[j], -eta);
    const double predicted = 2.0 * kPi * lambda *
                             (std::pow(v, 2.0 - eta) - std::pow(radius, 2.0 - eta)) / (eta - 2.0);
    const double diff = interference - predicted;
    sum += diff;
    sum_sq += diff * diff;
  }
  const double mean = sum / geoms;
  const double sd = std::sqrt((sum_sq / geoms - mean * mean) / geoms);
  CHECK(std::fabs(mean) < 3.0 * sd);
}

TEST_CASE("pzf_filter zero-forcing and normalization") {
  // Orthonormal columns are their own filter.
  Eigen::MatrixXcd q = random_channel(8, 4, 11);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(q);
  const Eigen::MatrixXcd ortho = qr.householderQ() * Eigen::MatrixXcd::Identity(8, 4);
  const Eigen::MatrixXcd self = phy::pzf_filter(ortho);
  CHECK((self - ortho).cwiseAbs().maxCoeff() < 1e-12);

  for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Eigen::MatrixXcd h = random_channel(8, 4, seed);
    const Eigen::MatrixXcd w = phy::pzf_filter(h);
    for (int l = 0; l < 4; ++l) {
      CHECK(std::fabs(w.col(l).norm() - 1.0) < 1e-12);
      for (int j = 0; j < 4; ++j) {
        if (j == l) continue;
        const double residual = std::abs(w.col(l).dot(h.col(j))) / h.col(j).norm();
        CHECK(residual < 1e-10);
      }
    }
  }

  Eigen::MatrixXcd defective = random_channel(8, 4, 99);
  defective.col(3) = defective.col(0);
  CHECK_THROWS_AS(phy::pzf_filter(defective), std::runtime_error);
}

TEST_CASE("pzf gains follow the Gamma law (small-sample KS)") {
  const int draws = 20000;
  const int dof = 8 - 4 + 1;
  std::vector<double> gains;
  gains.reserve(draws);
  for (int i = 0; static_cast<int>(gains.size()) < draws; ++i) {
    const auto g = phy::pzf_signal_gains(random_channel(8, 4, 100000 + i));
    for (int c = 0; c < 4 && static_cast<int>(gains.size()) < draws; ++c) gains.push_back(g(c));
  }
  std::sort(gains.begin(), gains.end());
  double d_stat = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double f = specfun::gamma_p(dof, gains[i]);
    d_stat = std::max({d_stat, std::fabs(f - static_cast<double>(i) / draws),
                       std::fabs(f - static_cast<double>(i + 1) / draws)});
  }
  CHECK(d_stat < 1.6276 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("mc_conditional_rate determinism and invariances") {
  const auto phi = geometry::sample_ppp(1.0, 40.0, 7);
  phy::ChannelParams ch;
  ch.n_antennas = 8;
  ch.pathloss_eta = 3.75;
  const auto a = phy::mc_conditional_rate(phi, 2, 4, ch, 500, 99, 1);
  const auto b = phy::mc_conditional_rate(phi, 2, 4, ch, 500, 99, 1);
  CHECK(a.rate_bits == b.rate_bits);
  const auto c = phy::mc_conditional_rate(phi, 2, 4, ch, 500, 99, 4);
  CHECK(a.rate_bits == c.rate_bits);  // thread count must not matter

  phy::ChannelParams scaled = ch;
  scaled.pathloss_intercept = 7.0;
  scaled.tx_power = 0.3;
  const auto d = phy::mc_conditional_rate(phi, 2, 4, scaled, 500, 99, 1);
  CHECK(rel(d.rate_bits, a.rate_bits) < 1e-12);  // common factors cancel in the SIR

  geometry::PPPRealization tiny;
  tiny.distances = {0.5, 1.0, 1.5};
  CHECK_THROWS_AS(phy::mc_conditional_rate(tiny, 1, 4, ch, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("decoding thresholds") {
  const double eta = 3.75;
  const double lambda = 1.0;
  const int dof = 5;

  // Defining identity of the outer threshold.
  for (const double rate : {0.4, 1.0, 2.3}) {
    const double rhat = phy::threshold_r_l2(rate, eta, lambda, dof);
    const double sir = phy::local_average_sir(rhat, rhat, eta, lambda);
    CHECK(rel(sir, specfun::qlb_rate_inverse(dof, rate)) < 1e-10);
  }
  CHECK(phy::threshold_r_l2(2.0, eta, lambda, dof) < phy::threshold_r_l2(1.0, eta, lambda, dof));

  // Defining identity of the inner threshold, and the case-split point where
  // it crosses the conditioning distance.
  for (const double v : {0.6, 1.0, 1.9}) {
    const double rhat1 = phy::threshold_r_l1(1.0, v, eta, lambda, dof);
    const double sir = phy::local_average_sir(rhat1, v, eta, lambda);
    CHECK(rel(sir, specfun::qlb_rate_inverse(dof, 1.0)) < 1e-10);
  }
  CHECK(phy::threshold_r_l1(1.0, 2.0, eta, lambda, dof) >
        phy::threshold_r_l1(1.0, 1.0, eta, lambda, dof));
  const double a = std::sqrt((eta - 2.0) /
                             (2.0 * kPi * lambda * specfun::qlb_rate_inverse(dof, 1.0)));
  CHECK(rel(phy::threshold_r_l1(1.0, a, eta, lambda, dof), a) < 1e-12);

  // Threshold decision is equivalent to the rate comparison on a grid.
  const double rate = 1.2;
  const double rhat2 = phy::threshold_r_l2(rate, eta, lambda, dof);
  for (double r = 0.05; r < 2.0; r += 0.05) {
    const bool by_threshold = r < rhat2;
    const bool by_rate = specfun::qlb_rate(dof, phy::local_average_sir(r, r, eta, lambda)) > rate;
    CHECK(by_threshold == by_rate);
  }

  // Spatial scalability: the threshold scales exactly as 1/sqrt(lambda).
  const double base = phy::threshold_r_l2(1.0, eta, 1.0, dof);
  for (const double lam : {0.1, 1.0, 10.0}) {
    CHECK(rel(phy::threshold_r_l2(1.0, eta, lam, dof) * std::sqrt(lam), base) < 1e-12);
  }
}

}  // TEST_SUITE
