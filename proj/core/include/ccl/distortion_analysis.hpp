#pragma once

#include <array>
#include <cstdint>

#include "ccl/types.hpp"

namespace ccl::distortion {

/// Probability simplex over the three decoding outcomes of a user:
/// nothing decoded, layer 1 only, or both layers.
struct DecodingProbabilities {
  double p_none = 0.0;
  double p_layer1_only = 0.0;
  double p_both = 0.0;
};

/// Rate-distortion levels of the two-layer Gaussian refinement code.
struct DistortionModel {
  double sigma2 = 1.0;
  double rate_source_1 = 1.0;
  double rate_source_2 = 2.0;
  /// {sigma2, sigma2 2^{-2 Rs1}, sigma2 2^{-2(Rs1+Rs2)}}, strictly decreasing.
  std::array<double, 3> levels() const;
};

/// (eta-2) / (2 * qlb_rate_inverse(dof, rate)). Takes no density argument:
/// the decoding probabilities are independent of the node density.
double gamma_coeff(double rate_bits, int dof, double eta);

/// Probability that the layer-1 stream decodes, i.e. its quasi-lower-bound
/// rate clears `rate1_bits`. Requires 1 <= L1 < L2 and eta > 2.
double p_layer1_success(double rate1_bits, int l1, int l2, double eta, int dof);

/// P(layer 1 decodes, layer 2 fails); case split at rate1 >= rate2.
double p_joint_ok1_fail2(double rate1_bits, double rate2_bits, int l1, int l2, double eta,
                         int dof);

/// P(both layers decode); case split at rate1 >= rate2.
double p_joint_ok1_ok2(double rate1_bits, double rate2_bits, int l1, int l2, double eta, int dof);

/// Assembles the outcome simplex from the closed forms. For the off-model
/// degenerate case L1 == L2 both layers are gated by the same ordered
/// distance and a single-threshold model is used.
DecodingProbabilities decoding_probabilities(double rate1_bits, double rate2_bits,
                                             const SystemParams& params);

/// Mean distortion p_none * s2 + p_l1 * s2 2^{-2Rs1} + p_both * s2 2^{-2(Rs1+Rs2)}.
double average_distortion(const DecodingProbabilities& probs, double rate_source_1,
                          double rate_source_2, double sigma2 = 1.0);

/// Convenience: closed-form average distortion at the given channel rates.
double average_distortion_at(double rate1_bits, double rate2_bits, const SystemParams& params);

/// Independent quadrature oracle: outer adaptive integration over the L2-th
/// distance density with the conditional CDF in closed polynomial form.
/// Deliberately avoids the incomplete-gamma path of the closed forms.
DecodingProbabilities quadrature_probabilities(double rate1_bits, double rate2_bits, int l1,
                                               int l2, double eta, int dof, double lambda = 1.0);

struct McProbabilities {
  DecodingProbabilities probs;
  std::array<double, 3> std_error{};
  long draws = 0;
};

/// Geometry-level Monte Carlo oracle: samples edge-node fields and counts the
/// threshold decoding events. Deterministic per seed, independent of thread
/// count.
McProbabilities mc_probabilities(double rate1_bits, double rate2_bits, const SystemParams& params,
                                 long draws, std::uint64_t seed, int threads = 1);

}  // namespace ccl::distortion
