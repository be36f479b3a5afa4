#include "cloudchamber/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace cloudchamber {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

Real get_real(const json& obj, const std::string& path, const char* key, Real fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const Real r = v.get<Real>();
  if (!std::isfinite(r)) throw ConfigError(join(path, key), "must be finite");
  return r;
}

Real require_real(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required key");
  return get_real(obj, path, key, 0.0);
}

std::size_t get_count(const json& obj, const std::string& path, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t require_count(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required key");
  return get_count(obj, path, key, 0);
}

int get_kappa(const json& obj, const std::string& path, int fallback) {
  if (!obj.contains("kappa")) return fallback;
  const json& v = obj.at("kappa");
  if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != 2)) {
    throw ConfigError(join(path, "kappa"), "must be 1 or 2");
  }
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

SolveConfig parse_solver(const json& j, const std::string& path) {
  reject_unknown(j, path, {"method", "tolerance", "max_iterations"});
  SolveConfig s;
  s.method = keyed(join(path, "method"), [&] { return parse_solve_method(get_string(j, path, "method", "direct")); });
  s.tolerance = get_real(j, path, "tolerance", s.tolerance);
  s.max_iterations = get_count(j, path, "max_iterations", s.max_iterations);
  keyed(join(path, "tolerance"), [&] {
    s.validate();
    return 0;
  });
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

BoundaryMode parse_boundary_mode(const std::string& s) {
  if (s == "ghost") return BoundaryMode::Ghost;
  if (s == "symmetrized") return BoundaryMode::Symmetrized;
  throw std::invalid_argument("boundary mode must be 'ghost' or 'symmetrized', got '" + s + "'");
}

LayoutRule parse_layout_rule(const std::string& s) {
  if (s == "lattice") return LayoutRule::Lattice;
  if (s == "centered") return LayoutRule::Centered;
  throw std::invalid_argument("layout must be 'lattice' or 'centered', got '" + s + "'");
}

SolveMethod parse_solve_method(const std::string& s) {
  if (s == "direct") return SolveMethod::Direct;
  if (s == "iterative") return SolveMethod::Iterative;
  throw std::invalid_argument("solver must be 'direct' or 'iterative', got '" + s + "'");
}

const char* to_string(BoundaryMode m) { return m == BoundaryMode::Ghost ? "ghost" : "symmetrized"; }
const char* to_string(LayoutRule r) { return r == LayoutRule::Lattice ? "lattice" : "centered"; }
const char* to_string(SolveMethod m) { return m == SolveMethod::Direct ? "direct" : "iterative"; }

void RunConfig::validate() const {
  if (preset.has_value() == explicit_setup.has_value()) {
    throw ConfigError("preset", "exactly one of 'preset' and 'explicit' must be given");
  }
  if (preset) {
    if (!(preset->epsilon > 0.0)) throw ConfigError("preset.epsilon", "must be positive");
    if (preset->num_spins == 0 || preset->num_spins % 2 != 0) {
      throw ConfigError("preset.num_spins", "must be a positive even number");
    }
    if (preset->num_spins > kMaxSpins) throw ConfigError("preset.num_spins", "too many spins");
    if (preset->rho && !(*preset->rho >= 0.0)) throw ConfigError("preset.rho", "must be non-negative");
    if (preset->kappa != 1 && preset->kappa != 2) throw ConfigError("preset.kappa", "must be 1 or 2");
    if (preset->nx < 3) throw ConfigError("preset.nx", "must be at least 3");
    if (preset->steps == 0) throw ConfigError("preset.steps", "must be positive");
  } else {
    const auto& e = *explicit_setup;
    keyed("explicit", [&] {
      e.physics.validate();
      return 0;
    });
    if (e.detector_positions.empty()) {
      keyed("explicit", [&] {
        e.geometry.validate();
        return 0;
      });
    } else if (e.detector_positions.size() > kMaxSpins) {
      throw ConfigError("explicit.detector_positions", "too many detectors");
    }
    if (e.nx < 3) throw ConfigError("explicit.nx", "must be at least 3");
    if (e.time.steps == 0) throw ConfigError("explicit.steps", "must be positive");
    if (!(e.time.t_star > 0.0)) throw ConfigError("explicit.t_star", "must be positive");
  }
  keyed("solver", [&] {
    solve.validate();
    return 0;
  });
  if (!(arrival_drop > 0.0 && arrival_drop < 1.0)) throw ConfigError("arrival_drop", "must lie in (0, 1)");
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, "", {"preset", "explicit", "solver", "output_dir", "snapshot_stride", "arrival_drop"});
  RunConfig cfg;
  if (j.contains("preset")) {
    const json& p = j.at("preset");
    reject_unknown(p, "preset", {"epsilon", "num_spins", "rho", "kappa", "boundary_mode", "layout", "nx", "steps"});
    PresetOptions o;
    o.epsilon = get_real(p, "preset", "epsilon", o.epsilon);
    o.num_spins = get_count(p, "preset", "num_spins", o.num_spins);
    if (p.contains("rho")) o.rho = get_real(p, "preset", "rho", 0.0);
    o.kappa = get_kappa(p, "preset", o.kappa);
    o.nx = get_count(p, "preset", "nx", o.nx);
    o.steps = get_count(p, "preset", "steps", o.steps);
    cfg.boundary = keyed("preset.boundary_mode",
                         [&] { return parse_boundary_mode(get_string(p, "preset", "boundary_mode", "ghost")); });
    cfg.layout = keyed("preset.layout", [&] { return parse_layout_rule(get_string(p, "preset", "layout", "lattice")); });
    cfg.preset = o;
  }
  if (j.contains("explicit")) {
    const json& e = j.at("explicit");
    const std::string path = "explicit";
    reject_unknown(e, path,
                   {"hbar", "mass", "alpha", "beta", "rho", "p0", "sigma", "trunc_a", "x0", "kappa", "L", "D", "d",
                    "num_spins", "nx", "t_star", "steps", "boundary_mode", "layout", "detector_positions"});
    ExplicitSetup s;
    auto& ph = s.physics;
    ph.hbar = require_real(e, path, "hbar");
    ph.mass = get_real(e, path, "mass", 1.0);
    ph.alpha = get_real(e, path, "alpha", 0.0);
    ph.beta = get_real(e, path, "beta", 0.0);
    ph.rho = get_real(e, path, "rho", 0.0);
    ph.p0 = require_real(e, path, "p0");
    ph.sigma = require_real(e, path, "sigma");
    ph.x0 = get_real(e, path, "x0", 0.0);
    ph.kappa = get_kappa(e, path, 1);
    auto& g = s.geometry;
    g.L = require_real(e, path, "L");
    g.D = get_real(e, path, "D", g.L / 3.0);
    g.d = get_real(e, path, "d", 0.0);
    ph.trunc_a = get_real(e, path, "trunc_a", g.D);
    s.nx = require_count(e, path, "nx");
    s.time.t_star = require_real(e, path, "t_star");
    s.time.steps = require_count(e, path, "steps");
    if (e.contains("detector_positions")) {
      const json& ys = e.at("detector_positions");
      if (!ys.is_array()) throw ConfigError("explicit.detector_positions", "expected an array of numbers");
      for (const auto& y : ys) {
        if (!y.is_number()) throw ConfigError("explicit.detector_positions", "expected an array of numbers");
        s.detector_positions.push_back(y.get<Real>());
      }
      g.num_spins = get_count(e, path, "num_spins", s.detector_positions.size());
      if (g.num_spins != s.detector_positions.size()) {
        throw ConfigError("explicit.num_spins", "does not match the number of detector_positions");
      }
    } else {
      g.num_spins = require_count(e, path, "num_spins");
      if (!e.contains("d")) throw ConfigError("explicit.d", "missing required key");
    }
    cfg.boundary = keyed("explicit.boundary_mode",
                         [&] { return parse_boundary_mode(get_string(e, path, "boundary_mode", "ghost")); });
    cfg.layout = keyed("explicit.layout", [&] { return parse_layout_rule(get_string(e, path, "layout", "lattice")); });
    cfg.explicit_setup = s;
  }
  if (j.contains("solver")) cfg.solve = parse_solver(j.at("solver"), "solver");
  cfg.output_dir = get_string(j, "", "output_dir", cfg.output_dir);
  cfg.snapshot_stride = get_count(j, "", "snapshot_stride", cfg.snapshot_stride);
  cfg.arrival_drop = get_real(j, "", "arrival_drop", cfg.arrival_drop);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

void apply_overrides(RunConfig& cfg, const RunOverrides& ov) {
  if (!cfg.preset && !cfg.explicit_setup) cfg.preset = PresetOptions{};
  if (cfg.preset) {
    auto& p = *cfg.preset;
    if (ov.epsilon) p.epsilon = *ov.epsilon;
    if (ov.num_spins) p.num_spins = *ov.num_spins;
    if (ov.rho) p.rho = *ov.rho;
    if (ov.kappa) p.kappa = *ov.kappa;
    if (ov.nx) p.nx = *ov.nx;
    if (ov.steps) p.steps = *ov.steps;
  } else {
    auto& e = *cfg.explicit_setup;
    if (ov.epsilon) throw ConfigError("--epsilon", "only applies to preset configurations");
    if (ov.num_spins) throw ConfigError("--num-spins", "only applies to preset configurations");
    if (ov.rho) e.physics.rho = *ov.rho;
    if (ov.kappa) e.physics.kappa = *ov.kappa;
    if (ov.nx) e.nx = *ov.nx;
    if (ov.steps) e.time.steps = *ov.steps;
  }
  if (ov.boundary_mode) cfg.boundary = keyed("--boundary-mode", [&] { return parse_boundary_mode(*ov.boundary_mode); });
  if (ov.layout) cfg.layout = keyed("--layout", [&] { return parse_layout_rule(*ov.layout); });
  if (ov.solver) cfg.solve.method = keyed("--solver", [&] { return parse_solve_method(*ov.solver); });
  if (ov.tolerance) cfg.solve.tolerance = *ov.tolerance;
  if (ov.out_dir) cfg.output_dir = *ov.out_dir;
  if (ov.snapshot_stride) cfg.snapshot_stride = *ov.snapshot_stride;
  if (ov.kappa && *ov.kappa != 1 && *ov.kappa != 2) throw ConfigError("--kappa", "must be 1 or 2");
  cfg.validate();
}

void SweepConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
  if (num_spins.empty()) throw ConfigError("num_spins", "list must not be empty");
  if (rho.empty()) throw ConfigError("rho", "list must not be empty");
  for (std::size_t n : num_spins) {
    if (n == 0 || n % 2 != 0) throw ConfigError("num_spins", "values must be positive and even");
    if (n > kMaxSpins) throw ConfigError("num_spins", "too many spins");
  }
  for (Real r : rho) {
    if (!(r >= 0.0)) throw ConfigError("rho", "values must be non-negative");
  }
  if (kappa != 1 && kappa != 2) throw ConfigError("kappa", "must be 1 or 2");
  if (nx < 3) throw ConfigError("nx", "must be at least 3");
  if (steps == 0) throw ConfigError("steps", "must be positive");
  keyed("solver", [&] {
    solve.validate();
    return 0;
  });
  if (!(arrival_drop > 0.0 && arrival_drop < 1.0)) throw ConfigError("arrival_drop", "must lie in (0, 1)");
}

SweepConfig parse_sweep_config(const json& j) {
  reject_unknown(j, "", {"epsilon", "num_spins", "rho", "parallelism", "kappa", "boundary_mode", "layout", "nx",
                         "steps", "solver", "output_dir", "arrival_drop"});
  SweepConfig s;
  s.epsilon = get_real(j, "", "epsilon", s.epsilon);
  if (j.contains("num_spins")) {
    const json& v = j.at("num_spins");
    if (!v.is_array()) throw ConfigError("num_spins", "expected an array of integers");
    for (const auto& n : v) {
      if (!n.is_number_integer() || n.get<long long>() < 0) {
        throw ConfigError("num_spins", "expected an array of non-negative integers");
      }
      s.num_spins.push_back(n.get<std::size_t>());
    }
  }
  if (j.contains("rho")) {
    const json& v = j.at("rho");
    if (!v.is_array()) throw ConfigError("rho", "expected an array of numbers");
    for (const auto& r : v) {
      if (!r.is_number()) throw ConfigError("rho", "expected an array of numbers");
      s.rho.push_back(r.get<Real>());
    }
  }
  s.parallelism = get_count(j, "", "parallelism", s.parallelism);
  s.kappa = get_kappa(j, "", s.kappa);
  s.boundary = keyed("boundary_mode", [&] { return parse_boundary_mode(get_string(j, "", "boundary_mode", "ghost")); });
  s.layout = keyed("layout", [&] { return parse_layout_rule(get_string(j, "", "layout", "lattice")); });
  s.nx = get_count(j, "", "nx", s.nx);
  s.steps = get_count(j, "", "steps", s.steps);
  if (j.contains("solver")) s.solve = parse_solver(j.at("solver"), "solver");
  s.output_dir = get_string(j, "", "output_dir", s.output_dir);
  s.arrival_drop = get_real(j, "", "arrival_drop", s.arrival_drop);
  return s;
}

SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(read_json_file(path)); }

ResolvedRun resolve(const RunConfig& cfg) {
  cfg.validate();
  ResolvedRun r;
  r.boundary = cfg.boundary;
  r.solve = cfg.solve;
  if (cfg.preset) {
    const Preset p = keyed("preset", [&] { return preset_from_epsilon(*cfg.preset); });
    r.physics = p.physics;
    r.geometry = p.geometry;
    r.grid = p.grid;
    r.time = p.time;
    r.epsilon = cfg.preset->epsilon;
    r.layout = keyed("preset", [&] { return place_detectors(r.geometry, r.grid, cfg.layout); });
  } else {
    const auto& e = *cfg.explicit_setup;
    r.physics = e.physics;
    r.geometry = e.geometry;
    r.time = e.time;
    r.grid = keyed("explicit.nx", [&] { return build_grid(e.geometry.L, e.nx); });
    r.layout = keyed("explicit", [&] {
      return e.detector_positions.empty() ? place_detectors(r.geometry, r.grid, cfg.layout)
                                          : layout_from_positions(e.detector_positions, r.grid);
    });
  }
  if (r.layout.size() > 0 && r.geometry.d > 0.0) {
    auto w = validate_regime(r.physics, r.geometry);
    r.warnings.insert(r.warnings.end(), w.begin(), w.end());
  }
  auto sym = layout_symmetry_warnings(r.layout, r.grid);
  r.warnings.insert(r.warnings.end(), sym.begin(), sym.end());
  return r;
}

json describe(const ResolvedRun& r) {
  const auto& ph = r.physics;
  const auto& g = r.geometry;
  json j;
  if (r.epsilon) j["epsilon"] = *r.epsilon;
  j["physics"] = {{"hbar", ph.hbar}, {"mass", ph.mass},       {"alpha", ph.alpha}, {"beta", ph.beta},
                  {"rho", ph.rho},   {"p0", ph.p0},           {"sigma", ph.sigma}, {"trunc_a", ph.trunc_a},
                  {"x0", ph.x0},     {"kappa", ph.kappa}};
  j["geometry"] = {{"L", g.L}, {"D", g.D}, {"d", g.d}, {"num_spins", r.layout.size()}};
  j["grid"] = {{"nx", r.grid.nx}, {"dx", r.grid.dx}};
  j["time"] = {{"t_star", r.time.t_star}, {"steps", r.time.steps}, {"dt", r.time.dt()}};
  json det = json::array();
  for (std::size_t k = 0; k < r.layout.size(); ++k) {
    det.push_back({{"nominal", r.layout.nominal[k]},
                   {"position", r.layout.positions[k]},
                   {"grid_index", r.layout.grid_indices[k]},
                   {"side", r.layout.sides[k] == Side::Left ? "left" : "right"}});
  }
  j["detectors"] = det;
  j["boundary_mode"] = to_string(r.boundary);
  j["solver"] = {{"method", to_string(r.solve.method)},
                 {"tolerance", r.solve.tolerance},
                 {"max_iterations", r.solve.max_iterations}};
  const std::size_t m = r.channels();
  const std::size_t per_vector = m * r.grid.nx * sizeof(Complex);
  // State, rhs and scratch vectors, the three bands of H and the sparse
  // operator with its LU fill make roughly twelve vectors' worth.
  constexpr std::size_t kWorkingSetFactor = 12;
  j["channels"] = m;
  j["unknowns"] = m * r.grid.nx;
  j["arrival_estimate"] = ph.p0 != 0.0 ? g.D * ph.mass / ph.p0 : 0.0;
  j["memory"] = {{"bytes_per_vector", per_vector},
                 {"working_set_factor", kWorkingSetFactor},
                 {"estimated_bytes", per_vector * kWorkingSetFactor}};
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace cloudchamber
