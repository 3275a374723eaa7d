#include <CLI11.hpp>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "scenario.hpp"

namespace {

using ccl::cli::GlobalOptions;
using ccl::cli::ScenarioConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Scenario JSON file")->required();
  cmd->add_option("--out", args.out_path, "CSV output path");
  cmd->add_option("--seed", args.seed, "Override every configured seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--threads", args.threads, "Worker threads (results are thread-count invariant)")
      ->check(CLI::Range(1, 256));
}

int dispatch(const std::string& name, const CommonArgs& args) {
  const ScenarioConfig cfg = ccl::cli::load_scenario(args.config_path);
  GlobalOptions opt;
  if (args.seed_set) opt.seed = args.seed;
  opt.threads = args.threads;
  opt.out_path = args.out_path;
  if (name == "eval") return ccl::cli::cmd_eval(cfg, opt, std::cout);
  if (name == "levelset") return ccl::cli::cmd_levelset(cfg, opt, std::cout);
  if (name == "optimize") return ccl::cli::cmd_optimize(cfg, opt, std::cout);
  if (name == "sweep") return ccl::cli::cmd_sweep(cfg, opt, std::cout);
  if (name == "simulate") return ccl::cli::cmd_simulate(cfg, opt, std::cout);
  if (name == "caching-demo") return ccl::cli::cmd_caching_demo(cfg, opt, std::cout);
  throw std::logic_error("unknown command: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially scalable lossy coded caching: analysis, optimization, validation"};
  app.require_subcommand(1);

  CommonArgs args;
  const std::array<std::pair<const char*, const char*>, 6> commands{{
      {"eval", "Decoding probabilities, distortion and latency at the configured point"},
      {"levelset", "Distortion over a channel-rate grid (CSV)"},
      {"optimize", "Alternating rate/cache-split minimization of the delivery latency"},
      {"sweep", "Optimization across a distortion-target range (CSV)"},
      {"simulate", "Monte Carlo / quadrature validation of the closed forms"},
      {"caching-demo", "End-to-end multicast caching and erasure-code round trip"},
  }};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), args);

  try {
    app.parse(argc, argv);
    return dispatch(app.get_subcommands().front()->get_name(), args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);  // CLI11 prints usage; nonzero for errors
  } catch (const ccl::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
