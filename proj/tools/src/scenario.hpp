#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ccl/optimizer.hpp"
#include "ccl/types.hpp"

namespace ccl::cli {

/// Configuration problems map to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MonteCarloSettings {
  long num_draws = 100000;
  std::uint64_t seed = 20240915;
  long rate_fading_draws = 400;   // fading draws per geometry in the rate check
  long rate_geometries = 50;      // geometries in the rate check
};

struct SweepSpec {
  double d0_min = 0.06;
  double d0_max = 0.58;
  int num_points = 12;
  bool log_spacing = true;
};

struct LevelsetSpec {
  double rate_min = 0.1;
  double rate_max = 3.0;
  int num_points = 41;
};

struct CachingDemoSpec {
  int num_users = 4;
  int cache_param = 2;
  int num_edge_nodes = 6;
  int diversity_order = 2;
  int num_files = 4;
  std::uint64_t file_bits = 4096;
};

/// A full experiment description; JSON-backed, strictly validated (unknown
/// keys rejected, every quantity carries its unit in the key name).
struct ScenarioConfig {
  SystemParams system;
  double target_distortion = 0.2;
  optim::PsoConfig pso;
  int outer_iters = 10;
  MonteCarloSettings monte_carlo;
  SweepSpec sweep;
  LevelsetSpec levelset;
  CachingDemoSpec caching_demo;

  void validate() const;  // throws ConfigError / domain errors
};

/// Parses and validates a scenario file. Throws ConfigError on I/O, syntax,
/// schema, or range problems.
ScenarioConfig load_scenario(const std::string& path);

/// Parses a scenario from a JSON string (used by tests).
ScenarioConfig parse_scenario(const std::string& json_text);

/// The built-in default scenario as a JSON document.
std::string default_scenario_json();

}  // namespace ccl::cli
