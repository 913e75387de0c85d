#include "hsstokes/config.hpp"
#include "hsstokes/drivers.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hsstokes;

int main(int argc, char** argv) {
  CLI::App app{"Half-space Stokes flow with singular boundary data: field evaluation and asymptotic checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "override one key, e.g. --set quad.rel_tol=1e-8 (applied last)");

  const std::vector<std::pair<std::string, std::string>> help{
      {"eval", "field values at eval.points"},
      {"rates", "blow-up rate sweeps near the boundary and t = 1"},
      {"lemmas", "kernel identities, model time integrals, profile and convolution bounds"},
      {"residuals", "PDE residuals and the weak-form identity"},
      {"lp-scan", "local L^p integrability near the singular set"},
      {"report", "all of the above plus report.txt"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    config::RunConfig cfg = config_path.empty() ? config::RunConfig{} : config::load_file(config_path);
    config::apply_env(cfg, config::process_environment());
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw config::ConfigError("--set expects key=value, got '" + kv + "'");
      config::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return drivers::run(app.get_subcommands().front()->get_name(), cfg, std::cerr);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const drivers::UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  }
}
