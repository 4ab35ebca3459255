// Batch driver: certified key-rate pipeline for the three-state time-bin
// protocol with a partially phase-randomised source.
//
// Subcommands:
//   characterise  q per phase model from the configured visibility
//   simulate      honest-channel statistics CSV
//   decoy         certified per-block yield intervals at one distance
//   keyrate       certified key-rate points at one distance
//   sweep         full (q, distance) grid
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "qkd/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Certified decoy-state key-rate bounds for partially "
               "phase-randomised laser sources"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path = "-";
  double distance_km = 0.0;
  int jobs = 1;
  app.add_option("--config", config_path, "Configuration file (dotted keys)")
      ->required();
  app.add_option("--out", out_path, "Output CSV path ('-' for stdout)");
  app.add_option("--distance", distance_km, "Channel length in km");
  app.add_option("--jobs", jobs, "Worker threads for SDP solves")
      ->check(CLI::PositiveNumber);

  auto* characterise = app.add_subcommand("characterise");
  auto* simulate = app.add_subcommand("simulate");
  auto* decoy = app.add_subcommand("decoy");
  auto* keyrate = app.add_subcommand("keyrate");
  auto* sweep = app.add_subcommand("sweep");

  CLI11_PARSE(app, argc, argv);

  qkd::RunConfig cfg;
  try {
    cfg = qkd::load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (out_path == "-" && !cfg.out_path.empty()) out_path = cfg.out_path;

  try {
    if (characterise->parsed()) {
      qkd::run_characterise(cfg, out_path);
    } else if (simulate->parsed()) {
      qkd::run_simulate(cfg, out_path);
    } else if (decoy->parsed()) {
      qkd::run_decoy(cfg, distance_km, out_path, jobs);
    } else if (keyrate->parsed()) {
      qkd::run_keyrate(cfg, distance_km, out_path, jobs);
    } else if (sweep->parsed()) {
      qkd::run_sweep(cfg, out_path, jobs);
    }
  } catch (const qkd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  }
  return 0;
}
