#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ccl/stochastic_geometry.hpp"

namespace ccl::phy {

/// Physical-layer constants. The intercept/power/noise fields feed only the
/// Monte Carlo simulator; the analytic path works in the interference-limited
/// limit where they cancel.
struct ChannelParams {
  int n_antennas = 8;
  double pathloss_eta = 3.75;
  double pathloss_intercept = 1.0;  // beta
  double tx_power = 1.0;            // P
  double noise_n0 = 0.0;            // diagnostics only; analytic path assumes 0
  int coherence_symbols = 1;
};

/// Local-average SIR of the stream at distance r_l given the outermost
/// zero-forced node at r_zf: (r_zf^{eta-2} / r_l^eta) * (eta-2) / (2 pi lambda).
double local_average_sir(double r_l, double r_zf, double eta, double lambda);

/// Column-normalized pseudo-inverse H (H^H H)^{-1} of a full-column-rank
/// channel matrix; column l is orthogonal to every other column of H.
/// Throws on rank deficiency (condition estimate beyond 1e12).
Eigen::MatrixXcd pzf_filter(const Eigen::MatrixXcd& channel);

/// Post-zero-forcing signal gains per stream: 1 / [(H^H H)^{-1}]_{ll}.
/// For i.i.d. unit complex-Gaussian H these are Gamma(n_r - L + 1, 1).
Eigen::VectorXd pzf_signal_gains(const Eigen::MatrixXcd& channel);

struct McRateResult {
  double rate_bits;  ///< E[log2(1+SIR) | geometry] estimate
  double std_error;
  long draws;
};

/// Monte Carlo conditional ergodic rate of stream `stream` (1-based, <= n_zf)
/// for a fixed geometry, averaging over fading draws. Deterministic for a
/// fixed seed independent of `threads` (chunked counter-based streams,
/// fixed-order reduction).
McRateResult mc_conditional_rate(const geometry::PPPRealization& phi, int stream, int n_zf,
                                 const ChannelParams& params, long draws, std::uint64_t seed,
                                 int threads = 1);

/// Distance threshold for decoding the outermost zero-forced stream at
/// `rate_bits`: decoding succeeds iff r_{L2} is below the returned radius.
double threshold_r_l2(double rate_bits, double eta, double lambda, int dof);

/// Distance threshold for the layer-1 stream given r_{L2} = v.
double threshold_r_l1(double rate_bits, double v, double eta, double lambda, int dof);

/// Window radius such that the mean interference neglected beyond it is below
/// `tail_fraction` of the in-window mean, for sources beyond distance r_inner.
double min_mc_window_radius(double r_inner, double eta, double tail_fraction);

}  // namespace ccl::phy
