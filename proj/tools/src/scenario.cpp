#include "scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <set>
#include <sstream>

namespace ccl::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!ok.contains(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void parse_system(const json& j, SystemParams& p) {
  reject_unknown(j, "system",
                 {"pathloss_eta", "density_per_unit_area", "num_antennas", "num_users",
                  "num_files", "samples_per_file", "bandwidth_hz", "source_variance",
                  "cache_fraction_total"});
  read(j, "system", "pathloss_eta", p.pathloss_eta);
  read(j, "system", "density_per_unit_area", p.density_lambda);
  read(j, "system", "num_antennas", p.n_antennas);
  read(j, "system", "num_users", p.n_users);
  read(j, "system", "num_files", p.n_files);
  read(j, "system", "samples_per_file", p.samples_per_file);
  read(j, "system", "bandwidth_hz", p.bandwidth_hz);
  read(j, "system", "source_variance", p.source_variance);
  read(j, "system", "cache_fraction_total", p.cache_fraction);
}

void parse_layer(const json& j, const std::string& where, LayerSpec& l) {
  reject_unknown(j, where,
                 {"rate_source_bits_per_sample", "diversity_order", "cache_fraction",
                  "rate_channel_bits_per_symbol"});
  read(j, where, "rate_source_bits_per_sample", l.rate_source);
  read(j, where, "diversity_order", l.diversity);
  read(j, where, "cache_fraction", l.cache_fraction);
  read(j, where, "rate_channel_bits_per_symbol", l.rate_channel);
}

void parse_pso(const json& j, optim::PsoConfig& p, int& outer_iters) {
  reject_unknown(j, "pso",
                 {"swarm_size", "max_iters", "inertia", "cognitive", "social", "penalty_weight",
                  "rate_min_bits_per_symbol", "rate_max_bits_per_symbol", "seed", "outer_iters"});
  read(j, "pso", "swarm_size", p.swarm_size);
  read(j, "pso", "max_iters", p.max_iters);
  read(j, "pso", "inertia", p.inertia);
  read(j, "pso", "cognitive", p.cognitive);
  read(j, "pso", "social", p.social);
  read(j, "pso", "penalty_weight", p.penalty_weight);
  read(j, "pso", "rate_min_bits_per_symbol", p.rate_min);
  read(j, "pso", "rate_max_bits_per_symbol", p.rate_max);
  read(j, "pso", "seed", p.seed);
  read(j, "pso", "outer_iters", outer_iters);
}

void parse_mc(const json& j, MonteCarloSettings& m) {
  reject_unknown(j, "monte_carlo",
                 {"num_draws", "seed", "rate_fading_draws", "rate_geometries"});
  read(j, "monte_carlo", "num_draws", m.num_draws);
  read(j, "monte_carlo", "seed", m.seed);
  read(j, "monte_carlo", "rate_fading_draws", m.rate_fading_draws);
  read(j, "monte_carlo", "rate_geometries", m.rate_geometries);
}

void parse_sweep(const json& j, SweepSpec& s) {
  reject_unknown(j, "sweep", {"d0_min", "d0_max", "num_points", "log_spacing"});
  read(j, "sweep", "d0_min", s.d0_min);
  read(j, "sweep", "d0_max", s.d0_max);
  read(j, "sweep", "num_points", s.num_points);
  read(j, "sweep", "log_spacing", s.log_spacing);
}

void parse_levelset(const json& j, LevelsetSpec& s) {
  reject_unknown(j, "levelset",
                 {"rate_min_bits_per_symbol", "rate_max_bits_per_symbol", "num_points"});
  read(j, "levelset", "rate_min_bits_per_symbol", s.rate_min);
  read(j, "levelset", "rate_max_bits_per_symbol", s.rate_max);
  read(j, "levelset", "num_points", s.num_points);
}

void parse_demo(const json& j, CachingDemoSpec& d) {
  reject_unknown(j, "caching_demo",
                 {"num_users", "cache_param_t", "num_edge_nodes", "diversity_order", "num_files",
                  "file_bits"});
  read(j, "caching_demo", "num_users", d.num_users);
  read(j, "caching_demo", "cache_param_t", d.cache_param);
  read(j, "caching_demo", "num_edge_nodes", d.num_edge_nodes);
  read(j, "caching_demo", "diversity_order", d.diversity_order);
  read(j, "caching_demo", "num_files", d.num_files);
  read(j, "caching_demo", "file_bits", d.file_bits);
}

}  // namespace

void ScenarioConfig::validate() const {
  try {
    system.validate();
    pso.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!(target_distortion > 0.0 && target_distortion <= 1.0))
    throw ConfigError("scenario: target_distortion must lie in (0,1]");
  if (outer_iters < 1) throw ConfigError("scenario: pso.outer_iters must be >= 1");
  if (monte_carlo.num_draws < 1) throw ConfigError("scenario: monte_carlo.num_draws must be >= 1");
  if (monte_carlo.rate_fading_draws < 1 || monte_carlo.rate_geometries < 1)
    throw ConfigError("scenario: monte_carlo rate check sizes must be >= 1");
  if (!(sweep.d0_min > 0.0) || !(sweep.d0_max > sweep.d0_min) || sweep.d0_max > 1.0)
    throw ConfigError("scenario: sweep range must satisfy 0 < d0_min < d0_max <= 1");
  if (sweep.num_points < 2) throw ConfigError("scenario: sweep.num_points must be >= 2");
  if (!(levelset.rate_min > 0.0) || !(levelset.rate_max > levelset.rate_min))
    throw ConfigError("scenario: levelset rate grid must satisfy 0 < min < max");
  if (levelset.num_points < 2) throw ConfigError("scenario: levelset.num_points must be >= 2");
  if (caching_demo.num_users < 1 || caching_demo.num_users > 12)
    throw ConfigError("scenario: caching_demo.num_users must lie in [1,12]");
  if (caching_demo.cache_param < 0 || caching_demo.cache_param > caching_demo.num_users)
    throw ConfigError("scenario: caching_demo.cache_param_t must lie in [0, num_users]");
  if (caching_demo.num_edge_nodes < 1 || caching_demo.num_edge_nodes > 255)
    throw ConfigError("scenario: caching_demo.num_edge_nodes must lie in [1,255]");
  if (caching_demo.diversity_order < 1 ||
      caching_demo.diversity_order > caching_demo.num_edge_nodes)
    throw ConfigError("scenario: caching_demo.diversity_order must lie in [1, num_edge_nodes]");
  if (caching_demo.num_files < 1) throw ConfigError("scenario: caching_demo.num_files must be >= 1");
  if (caching_demo.file_bits < 1) throw ConfigError("scenario: caching_demo.file_bits must be >= 1");
}

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, "scenario",
                 {"system", "layers", "target_distortion", "pso", "monte_carlo", "sweep",
                  "levelset", "caching_demo"});
  ScenarioConfig cfg;
  if (j.contains("system")) parse_system(j.at("system"), cfg.system);
  if (j.contains("layers")) {
    const json& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != 2)
      throw ConfigError("layers: expected an array of exactly 2 layer objects");
    parse_layer(layers[0], "layers[0]", cfg.system.layers[0]);
    parse_layer(layers[1], "layers[1]", cfg.system.layers[1]);
  }
  read(j, "scenario", "target_distortion", cfg.target_distortion);
  if (j.contains("pso")) parse_pso(j.at("pso"), cfg.pso, cfg.outer_iters);
  if (j.contains("monte_carlo")) parse_mc(j.at("monte_carlo"), cfg.monte_carlo);
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), cfg.sweep);
  if (j.contains("levelset")) parse_levelset(j.at("levelset"), cfg.levelset);
  if (j.contains("caching_demo")) parse_demo(j.at("caching_demo"), cfg.caching_demo);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string default_scenario_json() {
  return R"({
  "system": {
    "pathloss_eta": 3.75,
    "density_per_unit_area": 1.0,
    "num_antennas": 8,
    "num_users": 20,
    "num_files": 100,
    "samples_per_file": 10000,
    "bandwidth_hz": 1000000.0,
    "source_variance": 1.0,
    "cache_fraction_total": 0.3
  },
  "layers": [
    {
      "rate_source_bits_per_sample": 1.0,
      "diversity_order": 2,
      "cache_fraction": 0.3,
      "rate_channel_bits_per_symbol": 1.0
    },
    {
      "rate_source_bits_per_sample": 2.0,
      "diversity_order": 4,
      "cache_fraction": 0.3,
      "rate_channel_bits_per_symbol": 1.0
    }
  ],
  "target_distortion": 0.2,
  "pso": {
    "swarm_size": 40,
    "max_iters": 200,
    "inertia": 0.7,
    "cognitive": 1.5,
    "social": 1.5,
    "penalty_weight": 1000.0,
    "rate_min_bits_per_symbol": 0.01,
    "rate_max_bits_per_symbol": 12.0,
    "seed": 1,
    "outer_iters": 10
  },
  "monte_carlo": {
    "num_draws": 100000,
    "seed": 20240915,
    "rate_fading_draws": 400,
    "rate_geometries": 50
  },
  "sweep": {
    "d0_min": 0.06,
    "d0_max": 0.58,
    "num_points": 12,
    "log_spacing": true
  },
  "levelset": {
    "rate_min_bits_per_symbol": 0.1,
    "rate_max_bits_per_symbol": 3.0,
    "num_points": 41
  },
  "caching_demo": {
    "num_users": 4,
    "cache_param_t": 2,
    "num_edge_nodes": 6,
    "diversity_order": 2,
    "num_files": 4,
    "file_bits": 4096
  }
})";
}

}  // namespace ccl::cli
