#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cloudchamber/assembly.hpp"
#include "cloudchamber/model.hpp"
#include "cloudchamber/solver.hpp"

namespace cloudchamber {

/// Invalid configuration; `key()` names the offending entry (dotted path).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExplicitSetup {
  PhysicalParams physics;
  Geometry geometry;
  std::size_t nx = 1000;
  TimeGrid time;
  std::vector<Real> detector_positions;  // overrides the layout rule when nonempty
};

struct RunConfig {
  std::optional<PresetOptions> preset;
  std::optional<ExplicitSetup> explicit_setup;
  BoundaryMode boundary = BoundaryMode::Ghost;
  LayoutRule layout = LayoutRule::Lattice;
  SolveConfig solve;
  std::string output_dir = "out";
  std::size_t snapshot_stride = 0;
  Real arrival_drop = 0.01;

  void validate() const;
};

/// Command-line values that replace config entries when set.
struct RunOverrides {
  std::optional<Real> epsilon;
  std::optional<std::size_t> num_spins;
  std::optional<Real> rho;
  std::optional<int> kappa;
  std::optional<std::string> boundary_mode;
  std::optional<std::string> layout;
  std::optional<std::string> solver;
  std::optional<Real> tolerance;
  std::optional<std::size_t> nx;
  std::optional<std::size_t> steps;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> snapshot_stride;
};

struct SweepConfig {
  Real epsilon = 0.1;
  std::vector<std::size_t> num_spins;
  std::vector<Real> rho;
  std::size_t parallelism = 0;  // 0: hardware concurrency
  int kappa = 1;
  BoundaryMode boundary = BoundaryMode::Ghost;
  LayoutRule layout = LayoutRule::Lattice;
  std::size_t nx = 1000;
  std::size_t steps = 350;
  SolveConfig solve;
  std::string output_dir = "sweep";
  Real arrival_drop = 0.01;

  void validate() const;
};

/// Everything a simulation needs, derived from a RunConfig.
struct ResolvedRun {
  PhysicalParams physics;
  Geometry geometry;
  Grid grid;
  TimeGrid time;
  DetectorLayout layout;
  BoundaryMode boundary = BoundaryMode::Ghost;
  SolveConfig solve;
  std::optional<Real> epsilon;
  std::vector<std::string> warnings;

  std::size_t channels() const { return channel_count(layout.size()); }
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
void apply_overrides(RunConfig& cfg, const RunOverrides& ov);

SweepConfig parse_sweep_config(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::string& path);

/// Builds grid and layout and collects regime/symmetry warnings.
ResolvedRun resolve(const RunConfig& cfg);

/// Resolved parameters including derived quantities (dx, dt, snapped
/// detectors, arrival estimate D/p0, memory estimate).
nlohmann::json describe(const ResolvedRun& r);

BoundaryMode parse_boundary_mode(const std::string& s);
LayoutRule parse_layout_rule(const std::string& s);
SolveMethod parse_solve_method(const std::string& s);
const char* to_string(BoundaryMode m);
const char* to_string(LayoutRule r);
const char* to_string(SolveMethod m);

}  // namespace cloudchamber
