#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bate/config.hpp"
#include "bate/errors.hpp"
#include "bate/version.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace bate::cli;

  CLI::App app{"bearing-angle target motion estimation toolkit"};
  app.set_version_flag("--version", std::string("bate ") + bate::kVersion);
  app.require_subcommand(1);

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Run Monte-Carlo scenario simulations");
  sim->add_option("--preset", so.preset, "built-in scenario name")
      ->envname("BATE_PRESET");
  sim->add_option("--config", so.config_path, "scenario config JSON file")
      ->envname("BATE_CONFIG");
  sim->add_option("--runs", so.runs_override, "override the configured run count")
      ->check(CLI::PositiveNumber)
      ->envname("BATE_RUNS");
  auto* seed_opt = sim->add_option("--seed", so.seed_override, "override the base seed")
                       ->check(CLI::NonNegativeNumber)
                       ->envname("BATE_SEED");
  sim->add_option("--filter", so.filter, "estimators to record (default both)")
      ->check(CLI::IsMember({"both", "bearing_angle", "bearing_only"}))
      ->envname("BATE_FILTER");
  sim->add_option("--out", so.out_dir, "output directory (default bate-out)")
      ->envname("BATE_OUT");
  sim->add_option("--series", so.series, "per-run series files to keep (default first)")
      ->check(CLI::IsMember({"first", "all", "none"}))
      ->envname("BATE_SERIES");
  sim->add_flag("--dump-config", so.dump_config, "print the resolved config and exit");

  ObservabilityOptions oo;
  auto* obs = app.add_subcommand("observability",
                                 "Rank analysis and motion recovery over a window");
  obs->add_option("--preset", oo.preset, "built-in scenario name")->envname("BATE_PRESET");
  obs->add_option("--config", oo.config_path, "scenario config JSON file")
      ->envname("BATE_CONFIG");
  obs->add_option("--window", oo.window_path,
                  "recorded window CSV (t,gx,gy,gz,theta,pox,poy,poz)");
  obs->add_option("--samples", oo.samples,
                  "window length when synthesizing from a scenario (default 10)")
      ->check(CLI::PositiveNumber);
  obs->add_option("--target-order", oo.target_order,
                  "polynomial order of the target motion (default: from the scenario)");
  obs->add_option("--out", oo.out_path, "report file (default stdout)");
  obs->add_flag("--dump-config", oo.dump_config, "print the resolved config and exit");

  EstimateOptions eo;
  auto* est = app.add_subcommand("estimate", "Replay a measurement file through a filter");
  est->add_option("--preset", eo.preset, "built-in scenario name (filter settings source)")
      ->envname("BATE_PRESET");
  est->add_option("--config", eo.config_path, "scenario config JSON file")
      ->envname("BATE_CONFIG");
  est->add_option("--measurements", eo.measurements_path,
                  "measurement CSV (t,gx,gy,gz,theta[,pox,poy,poz])")
      ->required();
  est->add_option("--observer", eo.observer_path,
                  "observer position CSV when not in the measurement file");
  est->add_option("--filter", eo.filter, "estimator to run (default bearing_angle)")
      ->check(CLI::IsMember({"bearing_angle", "bearing_only"}))
      ->envname("BATE_FILTER");
  est->add_option("--out", eo.out_path, "estimates CSV path (default estimates.csv)")
      ->envname("BATE_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  so.seed_set = seed_opt->count() > 0;

  try {
    if (sim->parsed()) return cmd_simulate(so);
    if (obs->parsed()) return cmd_observability(oo);
    if (est->parsed()) return cmd_estimate(eo);
  } catch (const bate::InsufficientObservationsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bate::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
