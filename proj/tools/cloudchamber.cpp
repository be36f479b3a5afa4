#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cloudchamber/cli.hpp"

namespace {

template <typename T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void add_run_flags(CLI::App* app, cloudchamber::RunOverrides& ov) {
  optional_option(app, "--epsilon", ov.epsilon, "preset scale epsilon");
  optional_option(app, "--num-spins,-N", ov.num_spins, "number of detectors (even)");
  optional_option(app, "--rho", ov.rho, "flip coupling rho");
  optional_option(app, "--kappa", ov.kappa, "coupling factor (1 or 2)");
  optional_option(app, "--boundary-mode", ov.boundary_mode, "ghost | symmetrized");
  optional_option(app, "--layout", ov.layout, "lattice | centered");
  optional_option(app, "--solver", ov.solver, "direct | iterative");
  optional_option(app, "--tolerance", ov.tolerance, "relative residual tolerance");
  optional_option(app, "--nx", ov.nx, "grid points");
  optional_option(app, "--steps", ov.steps, "time steps K");
  optional_option(app, "--out-dir", ov.out_dir, "output directory");
  optional_option(app, "--snapshot-stride", ov.snapshot_stride, "full-state snapshot stride (0: endpoints)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cloudchamber;
  CLI::App app{"1D cloud chamber simulator: a particle coupled to N two-level detectors"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  RunOverrides run_ov;
  auto* run = app.add_subcommand("run", "run one simulation and write CSV/JSON artifacts");
  optional_option(run, "config", config, "JSON config file");
  add_run_flags(run, run_ov);

  RunOverrides info_ov;
  auto* info = app.add_subcommand("info", "print resolved parameters without running");
  optional_option(info, "config", config, "JSON config file");
  add_run_flags(info, info_ov);

  SweepOverrides sweep_ov;
  auto* sweep = app.add_subcommand("sweep", "run a grid of (N, rho) points and write sweep.csv");
  optional_option(sweep, "config", config, "JSON sweep config file");
  optional_option(sweep, "--epsilon", sweep_ov.epsilon, "preset scale epsilon");
  sweep->add_option("--num-spins,-N", sweep_ov.num_spins, "detector counts")->delimiter(',');
  sweep->add_option("--rho", sweep_ov.rho, "coupling values")->delimiter(',');
  optional_option(sweep, "--parallelism,-j", sweep_ov.parallelism, "concurrent points (0: all cores)");
  optional_option(sweep, "--kappa", sweep_ov.kappa, "coupling factor (1 or 2)");
  optional_option(sweep, "--solver", sweep_ov.solver, "direct | iterative");
  optional_option(sweep, "--out-dir", sweep_ov.out_dir, "output directory");
  optional_option(sweep, "--nx", sweep_ov.nx, "grid points");
  optional_option(sweep, "--steps", sweep_ov.steps, "time steps K");

  bool perturb = false;
  auto* validate = app.add_subcommand("validate", "compare against the dense oracle and check invariants");
  validate->add_flag("--perturb-kappa", perturb, "negative control: oracle uses the other coupling factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*run) return cmd_run(config, run_ov, std::cout, std::cerr);
  if (*info) return cmd_info(config, info_ov, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(config, sweep_ov, std::cout, std::cerr);
  if (*validate) return cmd_validate(perturb, std::cout, std::cerr);
  return kExitConfigError;
}
