#include "cloudchamber/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace cloudchamber {

namespace {

std::string fmt(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void PhysicalParams::validate() const {
  if (!(hbar > 0.0)) throw ParameterError("hbar must be positive, got " + fmt(hbar));
  if (!(mass > 0.0)) throw ParameterError("mass must be positive, got " + fmt(mass));
  if (!(alpha >= 0.0)) throw ParameterError("alpha must be non-negative, got " + fmt(alpha));
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative, got " + fmt(beta));
  if (!(rho >= 0.0)) throw ParameterError("rho must be non-negative, got " + fmt(rho));
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive, got " + fmt(sigma));
  if (!(trunc_a > 0.0)) throw ParameterError("trunc_a must be positive, got " + fmt(trunc_a));
  if (!std::isfinite(p0) || !std::isfinite(x0)) throw ParameterError("p0 and x0 must be finite");
  if (kappa != 1 && kappa != 2) throw ParameterError("kappa must be 1 or 2, got " + std::to_string(kappa));
}

void Geometry::validate() const {
  if (!(L > 0.0)) throw ParameterError("L must be positive, got " + fmt(L));
  if (!(D > 0.0 && D < L)) throw ParameterError("D must lie in (0, L), got " + fmt(D));
  if (!(d > 0.0)) throw ParameterError("d must be positive, got " + fmt(d));
  if (num_spins % 2 != 0) {
    throw ParameterError("number of spins must be even, got " + std::to_string(num_spins));
  }
  if (num_spins > kMaxSpins) {
    throw ParameterError("number of spins must not exceed " + std::to_string(kMaxSpins));
  }
}

Grid build_grid(Real L, std::size_t nx) {
  if (nx < 3) throw ParameterError("grid needs at least 3 points, got " + std::to_string(nx));
  if (!(L > 0.0)) throw ParameterError("L must be positive, got " + fmt(L));
  Grid g;
  g.nx = nx;
  g.L = L;
  g.dx = 2.0 * L / static_cast<Real>(nx - 1);
  g.xs.resize(static_cast<Eigen::Index>(nx));
  for (std::size_t i = 0; i < nx; ++i) g.xs[static_cast<Eigen::Index>(i)] = -L + static_cast<Real>(i) * g.dx;
  g.xs[static_cast<Eigen::Index>(nx - 1)] = L;
  return g;
}

std::vector<Real> nominal_positions(const Geometry& geom, LayoutRule rule) {
  const std::size_t per_side = geom.num_spins / 2;
  // Offsets from the cluster centre, signed toward increasing |y|.
  std::vector<Real> offsets;
  offsets.reserve(per_side);
  if (rule == LayoutRule::Centered) {
    const Real mid = (static_cast<Real>(per_side) - 1.0) / 2.0;
    for (std::size_t m = 0; m < per_side; ++m) offsets.push_back((static_cast<Real>(m) - mid) * geom.d);
  } else {
    // Odd multiples of d/2 ordered -1, +1, -3, +3, ...: nearest to the
    // centre first, inner site first on ties.
    for (std::size_t m = 0; m < per_side; ++m) {
      const Real odd = static_cast<Real>(2 * (m / 2) + 1);
      offsets.push_back((m % 2 == 0 ? -odd : odd) * geom.d / 2.0);
    }
  }
  std::vector<Real> ys;
  ys.reserve(2 * per_side);
  for (Real o : offsets) {
    ys.push_back(geom.D + o);
    ys.push_back(-(geom.D + o));
  }
  std::sort(ys.begin(), ys.end());
  return ys;
}

std::size_t snap_to_grid(Real y, const Grid& grid) {
  const Real t = (y + grid.L) / grid.dx;
  const Real i = std::ceil(t - 0.5);
  return static_cast<std::size_t>(std::clamp(i, 0.0, static_cast<Real>(grid.nx - 1)));
}

DetectorLayout layout_from_positions(std::span<const Real> positions, const Grid& grid) {
  DetectorLayout layout;
  layout.nominal.assign(positions.begin(), positions.end());
  std::sort(layout.nominal.begin(), layout.nominal.end());
  for (Real y : layout.nominal) {
    if (!(y > -grid.L && y < grid.L)) {
      throw ConfigurationError("detector at " + fmt(y) + " lies outside the domain (-" + fmt(grid.L) +
                               ", " + fmt(grid.L) + ")");
    }
    const std::size_t i = snap_to_grid(y, grid);
    if (i == 0 || i + 1 == grid.nx) {
      throw ConfigurationError("detector at " + fmt(y) + " snaps to a boundary grid point");
    }
    if (!layout.grid_indices.empty() && layout.grid_indices.back() == i) {
      throw ConfigurationError("detectors at " + fmt(layout.nominal[layout.size() - 1]) + " and " +
                               fmt(y) + " snap to the same grid point; refine the grid");
    }
    layout.grid_indices.push_back(i);
    const Real snapped = grid.xs[static_cast<Eigen::Index>(i)];
    layout.positions.push_back(snapped);
    layout.sides.push_back(snapped < 0.0 ? Side::Left : Side::Right);
  }
  return layout;
}

DetectorLayout place_detectors(const Geometry& geom, const Grid& grid, LayoutRule rule) {
  geom.validate();
  const auto ys = nominal_positions(geom, rule);
  return layout_from_positions(ys, grid);
}

std::vector<std::string> layout_symmetry_warnings(const DetectorLayout& layout, const Grid& grid) {
  std::vector<std::string> warnings;
  const std::size_t n = layout.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t mirrored = grid.nx - 1 - layout.grid_indices[j];
    if (layout.grid_indices[n - 1 - j] != mirrored) {
      warnings.push_back("detector " + std::to_string(j) + " at grid index " +
                         std::to_string(layout.grid_indices[j]) + " has no mirrored partner");
    }
  }
  return warnings;
}

StateVector initial_state(const PhysicalParams& params, const Grid& grid, std::size_t channels) {
  params.validate();
  if (channels == 0) throw ParameterError("channel count must be positive");
  StateVector psi(channels, grid.nx, grid.dx);
  auto ch0 = psi.channel(0);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const Real x = grid.xs[static_cast<Eigen::Index>(i)] - params.x0;
    if (std::abs(x) >= params.trunc_a) continue;
    const Real envelope = std::exp(-x * x / (4.0 * params.sigma * params.sigma));
    // e^{-ikx} + e^{ikx}
    ch0[static_cast<Eigen::Index>(i)] = envelope * 2.0 * std::cos(params.p0 * x / params.hbar);
  }
  const Real n2 = psi.norm2();
  if (!(n2 > 0.0)) {
    throw ConfigurationError("initial state vanishes on the grid; truncation half-width " +
                             fmt(params.trunc_a) + " is too small for dx = " + fmt(grid.dx));
  }
  psi.values /= std::sqrt(n2);
  return psi;
}

std::vector<std::string> validate_regime(const PhysicalParams& params, const Geometry& geom) {
  constexpr Real kMuchLess = 10.0;
  std::vector<std::string> warnings;
  if (!(kMuchLess * params.beta <= 1.0 / geom.d)) {
    warnings.push_back("beta << 1/d violated: beta = " + fmt(params.beta) + ", 1/d = " + fmt(1.0 / geom.d));
  }
  if (!(geom.d < params.sigma)) {
    warnings.push_back("d < sigma violated: d = " + fmt(geom.d) + ", sigma = " + fmt(params.sigma));
  }
  if (!(kMuchLess * params.sigma <= geom.D)) {
    warnings.push_back("sigma << D violated: sigma = " + fmt(params.sigma) + ", D = " + fmt(geom.D));
  }
  return warnings;
}

Preset preset_from_epsilon(const PresetOptions& options) {
  const Real eps = options.epsilon;
  if (!(eps > 0.0)) throw ParameterError("epsilon must be positive, got " + fmt(eps));
  if (options.num_spins % 2 != 0) {
    throw ParameterError("number of spins must be even, got " + std::to_string(options.num_spins));
  }
  if (options.num_spins == 0) throw ParameterError("number of spins must be positive");
  if (options.steps == 0) throw ParameterError("step count must be positive");

  Preset p;
  p.geometry.L = 1.5;
  p.geometry.D = p.geometry.L / 3.0;
  p.geometry.d = eps / static_cast<Real>(options.num_spins);
  p.geometry.num_spins = options.num_spins;

  p.physics.hbar = eps;
  p.physics.mass = 1.0;
  p.physics.alpha = std::pow(eps, 4);
  p.physics.beta = std::pow(eps, 4);
  p.physics.rho = options.rho.value_or(1.0 / (eps * eps));
  p.physics.p0 = 4.0 / (3.0 * eps);
  p.physics.sigma = eps / 4.0;
  p.physics.trunc_a = p.geometry.D;
  p.physics.x0 = 0.0;
  p.physics.kappa = options.kappa;

  p.grid = build_grid(p.geometry.L, options.nx);
  p.time = TimeGrid{0.065, options.steps};

  p.physics.validate();
  p.geometry.validate();
  return p;
}

}  // namespace cloudchamber
