#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ccl {

/// Per-layer configuration of the two-layer successive-refinement scheme.
struct LayerSpec {
  double rate_source = 1.0;     ///< source coding rate, bits per sample
  int diversity = 2;            ///< macro-diversity order: coded blocks needed to decode
  double cache_fraction = 0.3;  ///< fraction of this layer cached at each user
  double rate_channel = 1.0;    ///< channel coding rate, bits per symbol
};

/// Global physical and network constants of a scenario.
struct SystemParams {
  double pathloss_eta = 3.75;     ///< pathloss exponent, must exceed 2
  double density_lambda = 1.0;    ///< edge-node density, nodes per unit area
  int n_antennas = 8;             ///< receive antennas per user
  int n_users = 20;               ///< number of caching users K
  int n_files = 100;              ///< library size N
  double samples_per_file = 1e4;  ///< source samples per file F
  double bandwidth_hz = 1e6;      ///< channel bandwidth w
  double source_variance = 1.0;   ///< per-sample source variance
  double cache_fraction = 0.3;    ///< global fraction of library bits cached per user
  std::array<LayerSpec, 2> layers{LayerSpec{1.0, 2, 0.3, 1.0},
                                  LayerSpec{2.0, 4, 0.3, 1.0}};

  /// Diversity order of the post-zero-forcing signal gain, n_antennas - L2 + 1.
  int zf_dof() const { return n_antennas - layers[1].diversity + 1; }

  /// Throws std::domain_error on any out-of-range field.
  void validate() const;
};

/// Strongly typed diversity order for the ergodic-rate functions.
/// Holds dof = n_antennas - L2 + 1 when built from SystemParams.
struct ErgodicRateSpec {
  explicit ErgodicRateSpec(int dof);
  static ErgodicRateSpec from_system(const SystemParams& params);
  int dof_M;
};

}  // namespace ccl
