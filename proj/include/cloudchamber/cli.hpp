#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cloudchamber/config.hpp"
#include "cloudchamber/solver.hpp"

namespace cloudchamber {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidationFailed = 1,
  kExitConfigError = 2,
  kExitSolverFailure = 3,
  kExitIoError = 4,
};

inline constexpr int kSchemaVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationResult {
  ResolvedRun resolved;
  RunRecord record;
  std::optional<Real> arrival;
  Real max_norm_drift = 0.0;        // max_k | ||psi_k||^2 - ||psi_0||^2 |
  Real max_energy_drift_rel = 0.0;  // max_k |E_k - E_0| / |E_0|
  Real max_side_asymmetry = 0.0;    // max_k |LRC_left - LRC_right|
  double wall_seconds = 0.0;
};

/// Assembles, runs and summarises one resolved configuration.
SimulationResult simulate(const ResolvedRun& run, Real arrival_drop = 0.01, std::size_t snapshot_stride = 0);

/// timeseries.csv, channels_final.csv and summary.json into `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const SimulationResult& result);

std::string format_number(Real v);

struct SweepOverrides {
  std::optional<Real> epsilon;
  std::vector<std::size_t> num_spins;
  std::vector<Real> rho;
  std::optional<std::size_t> parallelism;
  std::optional<int> kappa;
  std::optional<std::string> solver;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> nx;
  std::optional<std::size_t> steps;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  Real value = 0.0;
  Real tolerance = 0.0;
  std::string detail;
};

/// Oracle comparison matrix plus structural and invariant checks. With
/// `perturb_kappa` the oracle uses the other coupling factor (negative
/// control: the comparison checks must then fail).
std::vector<CheckResult> run_validation_suite(bool perturb_kappa = false);

int cmd_run(const std::optional<std::string>& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err);
int cmd_sweep(const std::optional<std::string>& config_path, const SweepOverrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_validate(bool perturb_kappa, std::ostream& out, std::ostream& err);
int cmd_info(const std::optional<std::string>& config_path, const RunOverrides& overrides, std::ostream& out,
             std::ostream& err);

}  // namespace cloudchamber
