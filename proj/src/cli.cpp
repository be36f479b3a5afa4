#include "cloudchamber/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "cloudchamber/oracle.hpp"

namespace cloudchamber {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SimulationResult simulate(const ResolvedRun& resolved, Real arrival_drop, std::size_t snapshot_stride) {
  const auto start = std::chrono::steady_clock::now();
  SimulationResult out;
  out.resolved = resolved;

  auto h = std::make_shared<const DiscreteHamiltonian>(
      assemble_hamiltonian(resolved.physics, resolved.grid, resolved.layout, resolved.boundary));
  const CNSystem cn = assemble_cn(h, resolved.time.dt(), resolved.physics.hbar);
  RunOptions options;
  options.solve = resolved.solve;
  options.sides = resolved.layout.sides;
  options.snapshot_stride = snapshot_stride;
  out.record = run(cn, initial_state(resolved.physics, resolved.grid, h->channels), resolved.time.steps, options);

  const auto& series = out.record.series;
  const Real n0 = series.front().norm2;
  const Real e0 = series.front().energy;
  for (const auto& s : series) {
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(s.norm2 - n0));
    const Real de = std::abs(s.energy - e0);
    out.max_energy_drift_rel = std::max(out.max_energy_drift_rel, e0 != 0.0 ? de / std::abs(e0) : de);
    out.max_side_asymmetry =
        std::max(out.max_side_asymmetry, std::abs(s.classes.left_track - s.classes.right_track));
  }
  out.arrival = arrival_time(series, arrival_drop);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json classes_json(const ClassProbabilities& c) {
  return {{"UC", c.unchanged},
          {"OS", c.one_spin},
          {"LRC_left", c.left_track},
          {"LRC_right", c.right_track},
          {"two_LRC", c.two_lrc()},
          {"MT", c.multiple_tracks},
          {"row_sum", c.row_sum()}};
}

}  // namespace

void write_run_artifacts(const fs::path& dir, const SimulationResult& result) {
  ensure_directory(dir);
  const auto& series = result.record.series;
  {
    auto os = open_output(dir / "timeseries.csv");
    os << "t,norm2,energy,UC,OS,LRC_left,LRC_right,MT\n";
    for (const auto& s : series) {
      const auto& c = s.classes;
      os << format_number(s.t) << ',' << format_number(s.norm2) << ',' << format_number(s.energy) << ','
         << format_number(c.unchanged) << ',' << format_number(c.one_spin) << ',' << format_number(c.left_track)
         << ',' << format_number(c.right_track) << ',' << format_number(c.multiple_tracks) << '\n';
    }
    if (!os) throw IoError("failed writing timeseries.csv");
  }
  {
    auto os = open_output(dir / "channels_final.csv");
    os << "mask,probability\n";
    const auto cp = channel_probs(result.record.final_state, series.back().t);
    const std::size_t n = result.resolved.layout.size();
    for (std::size_t m = 0; m < cp.p.size(); ++m) {
      os << to_bitstring(SpinConfig{static_cast<std::uint32_t>(m)}, n) << ',' << format_number(cp.p[m]) << '\n';
    }
    if (!os) throw IoError("failed writing channels_final.csv");
  }
  {
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["parameters"] = describe(result.resolved);
    const auto& last = series.back();
    summary["final"] = classes_json(last.classes);
    summary["final"]["t"] = last.t;
    summary["final"]["norm2"] = last.norm2;
    summary["final"]["energy"] = last.energy;
    summary["diagnostics"] = {{"max_norm_drift", result.max_norm_drift},
                              {"max_energy_drift_rel", result.max_energy_drift_rel},
                              {"max_side_asymmetry", result.max_side_asymmetry},
                              {"arrival_time", result.arrival ? json(*result.arrival) : json(nullptr)}};
    summary["warnings"] = result.record.warnings;
    summary["metadata"] = {{"wall_seconds", result.wall_seconds}, {"finished_at", timestamp_utc()}};
    auto os = open_output(dir / "summary.json");
    os << summary.dump(2) << '\n';
    if (!os) throw IoError("failed writing summary.json");
  }
}

namespace {

RunConfig load_or_default(const std::optional<std::string>& path, const RunOverrides& overrides) {
  RunConfig cfg;
  if (path) cfg = load_run_config(*path);
  else cfg.preset = PresetOptions{};
  apply_overrides(cfg, overrides);
  return cfg;
}

}  // namespace

int cmd_run(const std::optional<std::string>& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg;
  ResolvedRun resolved;
  try {
    cfg = load_or_default(config_path, overrides);
    resolved = resolve(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  for (const auto& w : resolved.warnings) err << "warning: " << w << '\n';

  SimulationResult result;
  try {
    result = simulate(resolved, cfg.arrival_drop, cfg.snapshot_stride);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const NumericalError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  for (const auto& w : result.record.warnings) err << "warning: " << w << '\n';

  try {
    write_run_artifacts(cfg.output_dir, result);
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIoError;
  }
  const auto& c = result.record.series.back().classes;
  out << "UC " << format_number(c.unchanged) << "  OS " << format_number(c.one_spin) << "  LRC_left "
      << format_number(c.left_track) << "  LRC_right " << format_number(c.right_track) << "  MT "
      << format_number(c.multiple_tracks) << "\nwrote " << cfg.output_dir << '\n';
  return kExitOk;
}

int cmd_info(const std::optional<std::string>& config_path, const RunOverrides& overrides, std::ostream& out,
             std::ostream& err) {
  try {
    const RunConfig cfg = load_or_default(config_path, overrides);
    out << describe(resolve(cfg)).dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}

int cmd_sweep(const std::optional<std::string>& config_path, const SweepOverrides& ov, std::ostream& out,
              std::ostream& err) {
  SweepConfig sweep;
  try {
    if (config_path) sweep = load_sweep_config(*config_path);
    if (ov.epsilon) sweep.epsilon = *ov.epsilon;
    if (!ov.num_spins.empty()) sweep.num_spins = ov.num_spins;
    if (!ov.rho.empty()) sweep.rho = ov.rho;
    if (ov.parallelism) sweep.parallelism = *ov.parallelism;
    if (ov.kappa) sweep.kappa = *ov.kappa;
    if (ov.solver) sweep.solve.method = parse_solve_method(*ov.solver);
    if (ov.out_dir) sweep.output_dir = *ov.out_dir;
    if (ov.nx) sweep.nx = *ov.nx;
    if (ov.steps) sweep.steps = *ov.steps;
    sweep.validate();
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  struct Point {
    std::size_t num_spins;
    Real rho;
    std::optional<SimulationResult> result;
    std::string failure;
  };
  std::vector<Point> points;
  for (std::size_t n : sweep.num_spins) {
    for (Real r : sweep.rho) points.push_back({n, r, std::nullopt, {}});
  }

  const fs::path root = sweep.output_dir;
  try {
    ensure_directory(root);
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIoError;
  }

  auto point_dir = [&](const Point& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "N%zu_rho%g", p.num_spins, p.rho);
    return root / buf;
  };

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      Point& p = points[k];
      try {
        RunConfig cfg;
        cfg.preset = PresetOptions{sweep.epsilon, p.num_spins, p.rho, sweep.kappa, sweep.nx, sweep.steps};
        cfg.boundary = sweep.boundary;
        cfg.layout = sweep.layout;
        cfg.solve = sweep.solve;
        p.result = simulate(resolve(cfg), sweep.arrival_drop);
        write_run_artifacts(point_dir(p), *p.result);
      } catch (const std::exception& e) {
        p.failure = e.what();
      }
      std::lock_guard lock(log_mutex);
      out << "N=" << p.num_spins << " rho=" << format_number(p.rho) << (p.failure.empty() ? " done" : " FAILED: ")
          << p.failure << '\n';
    }
  };
  std::size_t degree = sweep.parallelism != 0 ? sweep.parallelism : std::thread::hardware_concurrency();
  degree = std::clamp<std::size_t>(degree, 1, points.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < degree; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  bool any_failed = false;
  try {
    auto os = open_output(root / "sweep.csv");
    os << "N,rho,LRC_one_side,two_LRC,OS,UC,MT,row_sum,arrival_time,wall_seconds,status\n";
    for (const auto& p : points) {
      os << p.num_spins << ',' << format_number(p.rho) << ',';
      if (!p.result) {
        any_failed = true;
        std::string msg = p.failure;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        os << ",,,,,,,,,failed: " << msg << '\n';
        continue;
      }
      const auto& c = p.result->record.series.back().classes;
      os << format_number(0.5 * c.two_lrc()) << ',' << format_number(c.two_lrc()) << ','
         << format_number(c.one_spin) << ',' << format_number(c.unchanged) << ','
         << format_number(c.multiple_tracks) << ',' << format_number(c.row_sum()) << ','
         << (p.result->arrival ? format_number(*p.result->arrival) : std::string()) << ','
         << format_number(p.result->wall_seconds) << ",ok\n";
    }
    if (!os) throw IoError("failed writing sweep.csv");
  } catch (const std::exception& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIoError;
  }
  out << "wrote " << (root / "sweep.csv").string() << '\n';
  return any_failed ? kExitSolverFailure : kExitOk;
}

namespace {

CheckResult at_most(std::string name, Real value, Real tol, std::string detail = {}) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

struct OracleCase {
  std::size_t num_spins;
  std::size_t nx;
  Real rho;
  Real beta;
  int kappa;
};

std::vector<Real> oracle_positions(std::size_t n) {
  if (n == 1) return {0.5};
  if (n == 2) return {-0.5, 0.5};
  return {-0.5, 0.45, 0.55};
}

Preset oracle_preset(std::size_t nx, std::size_t steps, Real rho, Real beta, int kappa) {
  PresetOptions o;
  o.num_spins = 2;
  o.rho = rho;
  o.kappa = kappa;
  o.nx = nx;
  o.steps = steps;
  Preset p = preset_from_epsilon(o);
  p.physics.beta = beta;
  return p;
}

}  // namespace

std::vector<CheckResult> run_validation_suite(bool perturb_kappa) {
  std::vector<CheckResult> checks;

  // Structural nonzero count.
  for (std::size_t n : {2, 4, 6, 8}) {
    for (std::size_t nx : {50, 1000}) {
      const Grid grid = build_grid(1.5, nx);
      Geometry geom{1.5, 0.5, 0.1 / static_cast<Real>(n), n};
      if (nx == 50) geom.d = 0.2;  // keep detectors on distinct points of the coarse grid
      const auto layout = place_detectors(geom, grid);
      PhysicalParams ph;
      ph.rho = 1.0;
      const auto h = assemble_hamiltonian(ph, grid, layout);
      const std::size_t m = std::size_t{1} << n;
      const std::size_t expect = (3 * nx - 2) * m + n * m;
      checks.push_back({"nnz N=" + std::to_string(n) + " Nx=" + std::to_string(nx), h.nnz() == expect,
                        static_cast<Real>(h.nnz()), static_cast<Real>(expect), "expected exact count"});
    }
  }

  // Sparse production vs dense oracle.
  for (std::size_t n : {1, 2, 3}) {
    const std::size_t nx = n == 3 ? 64 : (n == 2 ? 100 : 128);
    for (Real rho : {0.0, 10.0, 100.0}) {
      for (Real beta : {0.0, 1e-4}) {
        for (int kappa : {1, 2}) {
          Preset p = oracle_preset(nx, 50, rho, beta, kappa);
          const auto ys = oracle_positions(n);
          const auto layout = layout_from_positions(ys, p.grid);
          auto h = std::make_shared<const DiscreteHamiltonian>(assemble_hamiltonian(p.physics, p.grid, layout));
          const CNSystem cn = assemble_cn(h, p.time.dt(), p.physics.hbar);
          RunOptions opt;
          opt.sides = layout.sides;
          const auto init = initial_state(p.physics, p.grid, h->channels);
          const auto rec = run(cn, init, p.time.steps, opt);

          PhysicalParams oracle_physics = p.physics;
          if (perturb_kappa) oracle_physics.kappa = 3 - kappa;
          const auto ref = oracle::dense_run(oracle_physics, p.grid, layout, BoundaryMode::Ghost, p.time, init);
          const auto cmp = oracle::compare(rec.final_state, ref);
          const auto pa = channel_probs(rec.final_state);
          const auto pb = channel_probs(ref);
          Real prob_diff = 0.0;
          for (std::size_t m = 0; m < pa.p.size(); ++m) prob_diff = std::max(prob_diff, std::abs(pa.p[m] - pb.p[m]));
          char label[96];
          std::snprintf(label, sizeof label, "oracle N=%zu Nx=%zu rho=%g beta=%g kappa=%d", n, nx, rho, beta, kappa);
          checks.push_back(at_most(std::string(label) + " state", cmp.max_abs_diff, 1e-10, "max |psi - psi_ref|"));
          checks.push_back(at_most(std::string(label) + " probs", prob_diff, 1e-12, "max |p - p_ref|"));
        }
      }
    }
  }

  // Hermiticity and real spectrum of the symmetrized operator.
  {
    Preset p = oracle_preset(50, 10, 100.0, 1e-4, 1);
    const auto layout = layout_from_positions(std::vector<Real>{0.5}, p.grid);
    const auto h = assemble_hamiltonian(p.physics, p.grid, layout, BoundaryMode::Symmetrized);
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(h.to_sparse());
    checks.push_back(at_most("hermitian (symmetrized)", (dense - dense.adjoint()).cwiseAbs().maxCoeff(), 0.0));
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense, false);
    checks.push_back(at_most("real spectrum (symmetrized)", es.eigenvalues().imag().cwiseAbs().maxCoeff(), 1e-10));
    const auto ref = oracle::build_dense_system(p.physics, p.grid, layout, BoundaryMode::Symmetrized, p.time.dt());
    checks.push_back(at_most("oracle hermitian (symmetrized)", (ref.h - ref.h.adjoint()).cwiseAbs().maxCoeff(), 0.0));
  }

  // Norm, energy, decoupling, time reversal on a small run.
  {
    Preset p = oracle_preset(100, 50, 100.0, 1e-4, 1);
    const auto layout = layout_from_positions(std::vector<Real>{-0.5, 0.5}, p.grid);
    auto h = std::make_shared<const DiscreteHamiltonian>(
        assemble_hamiltonian(p.physics, p.grid, layout, BoundaryMode::Symmetrized));
    const CNSystem cn = assemble_cn(h, p.time.dt(), p.physics.hbar);
    RunOptions opt;
    opt.sides = layout.sides;
    const auto init = initial_state(p.physics, p.grid, h->channels);
    const auto rec = run(cn, init, p.time.steps, opt);
    Real norm_drift = 0.0;
    Real energy_drift = 0.0;
    Real partition = 0.0;
    for (const auto& s : rec.series) {
      norm_drift = std::max(norm_drift, std::abs(s.norm2 - 1.0));
      energy_drift = std::max(energy_drift, std::abs(s.energy - rec.series[0].energy) / std::abs(rec.series[0].energy));
      partition = std::max(partition, std::abs(s.classes.row_sum() - s.classes.total));
    }
    checks.push_back(at_most("norm conservation", norm_drift, 1e-10));
    checks.push_back(at_most("energy conservation", energy_drift, 1e-8));
    checks.push_back(at_most("class partition identity", partition, 1e-14));

    const auto back = run(cn.reversed(), rec.final_state, p.time.steps, opt);
    checks.push_back(at_most("time reversal", oracle::compare(back.final_state, init).max_abs_diff, 1e-8));

    Preset q = oracle_preset(100, 50, 0.0, 1e-4, 1);
    auto h0 = std::make_shared<const DiscreteHamiltonian>(assemble_hamiltonian(q.physics, q.grid, layout));
    const auto rec0 = run(assemble_cn(h0, q.time.dt(), q.physics.hbar), init, q.time.steps, opt);
    checks.push_back(at_most("decoupling rho=0", std::abs(rec0.series.back().classes.unchanged - 1.0), 1e-12));
  }

  return checks;
}

int cmd_validate(bool perturb_kappa, std::ostream& out, std::ostream& err) {
  std::vector<CheckResult> checks;
  try {
    checks = run_validation_suite(perturb_kappa);
  } catch (const std::exception& e) {
    err << "validation aborted: " << e.what() << '\n';
    return kExitValidationFailed;
  }
  std::size_t passed = 0;
  const CheckResult* worst = nullptr;
  Real worst_ratio = 0.0;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  value=" << format_number(c.value)
        << "  limit=" << format_number(c.tolerance) << '\n';
    if (c.pass) {
      ++passed;
      continue;
    }
    const Real ratio = c.tolerance > 0.0 ? c.value / c.tolerance : INFINITY;
    if (!worst || ratio > worst_ratio) {
      worst = &c;
      worst_ratio = ratio;
    }
  }
  out << passed << "/" << checks.size() << " checks passed\n";
  if (worst) {
    out << "worst offender: " << worst->name << " (" << format_number(worst->value) << " > "
        << format_number(worst->tolerance) << ")\n";
    return kExitValidationFailed;
  }
  return kExitOk;
}

}  // namespace cloudchamber
