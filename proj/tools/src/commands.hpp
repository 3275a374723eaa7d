#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "scenario.hpp"

namespace ccl::cli {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;  // overrides every configured seed
  int threads = 1;
  std::string out_path;  // CSV destination; empty = stdout only
};

/// Verbosity from the CCL_LOG environment variable: quiet|info|debug.
int log_level();
void log_info(const std::string& line);
void log_debug(const std::string& line);

/// Lossless CSV number format (17 significant digits).
std::string fmt17(double v);

// Each command returns a process exit code: 0 ok, 1 check failure.
// Configuration and domain errors propagate as exceptions.
int cmd_eval(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_levelset(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_optimize(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_sweep(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_simulate(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_caching_demo(const ScenarioConfig& cfg, const GlobalOptions& opt, std::ostream& out);

}  // namespace ccl::cli
