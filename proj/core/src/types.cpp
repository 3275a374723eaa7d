#include "ccl/types.hpp"

#include <stdexcept>
#include <string>

namespace ccl {

void SystemParams::validate() const {
  if (!(pathloss_eta > 2.0))
    throw std::domain_error("SystemParams: pathloss_eta must exceed 2");
  if (!(density_lambda > 0.0))
    throw std::domain_error("SystemParams: density_lambda must be positive");
  if (n_antennas < 1) throw std::domain_error("SystemParams: n_antennas must be >= 1");
  if (n_users < 1) throw std::domain_error("SystemParams: n_users must be >= 1");
  if (n_files < 1) throw std::domain_error("SystemParams: n_files must be >= 1");
  if (!(samples_per_file > 0.0))
    throw std::domain_error("SystemParams: samples_per_file must be positive");
  if (!(bandwidth_hz > 0.0))
    throw std::domain_error("SystemParams: bandwidth_hz must be positive");
  if (!(source_variance > 0.0))
    throw std::domain_error("SystemParams: source_variance must be positive");
  if (!(cache_fraction >= 0.0 && cache_fraction <= 1.0))
    throw std::domain_error("SystemParams: cache_fraction must lie in [0,1]");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string tag = "SystemParams: layer " + std::to_string(i + 1);
    if (!(l.rate_source > 0.0)) throw std::domain_error(tag + ": rate_source must be positive");
    if (l.diversity < 1) throw std::domain_error(tag + ": diversity must be >= 1");
    if (!(l.cache_fraction >= 0.0 && l.cache_fraction <= 1.0))
      throw std::domain_error(tag + ": cache_fraction must lie in [0,1]");
    if (!(l.rate_channel > 0.0)) throw std::domain_error(tag + ": rate_channel must be positive");
  }
  if (layers[0].diversity > layers[1].diversity)
    throw std::domain_error("SystemParams: layer-1 diversity must not exceed layer-2 diversity");
  if (layers[1].diversity > n_antennas)
    throw std::domain_error("SystemParams: layer-2 diversity must not exceed n_antennas");
}

ErgodicRateSpec::ErgodicRateSpec(int dof) : dof_M(dof) {
  if (dof < 1) throw std::domain_error("ErgodicRateSpec: dof must be >= 1");
}

ErgodicRateSpec ErgodicRateSpec::from_system(const SystemParams& params) {
  return ErgodicRateSpec(params.zf_dof());
}

}  // namespace ccl
