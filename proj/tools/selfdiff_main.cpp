// Command-line driver: selfdiff <solve|evaluate|kmc|compare|oracle|run> [flags]
#include <CLI11.hpp>
#include <iostream>

#include "selfdiff/errors.hpp"
#include "selfdiff/pipeline.hpp"

using namespace selfdiff;

namespace {

struct Overrides {
  std::string config;
  std::vector<std::pair<std::string, std::string>> settings;
};

void add_flag(CLI::App& app, Overrides& o, const std::string& flag, const std::string& key, const std::string& help) {
  app.add_option_function<std::string>(flag, [&o, key](const std::string& v) { o.settings.emplace_back(key, v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-diffusion matrix of a tagged particle in a periodic exclusion process"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file");
  add_flag(app, o, "--seed", "seed", "master seed (mandatory unless set in the config)");
  add_flag(app, o, "--out", "out", "output directory");
  add_flag(app, o, "--threads", "threads", "worker threads; results do not depend on it");
  add_flag(app, o, "--rank", "rank", "number of rank-1 terms");
  add_flag(app, o, "--M", "M", "grid half-width");
  add_flag(app, o, "--u", "u", "drift directions, e.g. \"1,0;0,1;1,1\"");
  add_flag(app, o, "--T", "T", "final time of each trajectory");
  add_flag(app, o, "--nhat", "nhat", "trajectory budget per density");
  add_flag(app, o, "--ntilde", "ntilde", "samples per stratum");
  add_flag(app, o, "--eps", "eps", "ALS relative tolerance");
  add_flag(app, o, "--repeats", "repeats", "independent repeats for variance tables");

  auto* solve = app.add_subcommand("solve", "low-rank minimization; writes checkpoints");
  auto* evaluate = app.add_subcommand("evaluate", "diffusion curve from checkpoints");
  auto* kmc = app.add_subcommand("kmc", "diffusion curve from kinetic Monte Carlo");
  auto* compare = app.add_subcommand("compare", "side-by-side report of both curves");
  auto* oracle = app.add_subcommand("oracle", "dense minimizer and rank gaps (N <= 12)");
  auto* run = app.add_subcommand("run", "the commands selected by route, then compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    for (const auto& [key, value] : o.settings) apply_setting(cfg, key, value);
    cfg.validate();

    if (solve->parsed()) std::cout << cmd_solve(cfg);
    if (evaluate->parsed()) std::cout << cmd_evaluate(cfg) << '\n';
    if (kmc->parsed()) std::cout << cmd_kmc(cfg) << '\n';
    if (compare->parsed()) std::cout << cmd_compare(cfg) << '\n';
    if (oracle->parsed()) std::cout << cmd_oracle(cfg);
    if (run->parsed()) {
      if (cfg.route != Route::KMC) {
        std::cout << cmd_solve(cfg);
        std::cout << cmd_evaluate(cfg) << '\n';
      }
      if (cfg.route != Route::Min) std::cout << cmd_kmc(cfg) << '\n';
      if (cfg.route == Route::Both) std::cout << cmd_compare(cfg) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const RunAborted& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
