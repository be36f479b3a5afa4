#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cloudchamber/spinspace.hpp"
#include "cloudchamber/state.hpp"

namespace cloudchamber {

/// Particle, spin and coupling constants.
///
/// `kappa` scales the cross-channel flip coupling: 1 reproduces the
/// half-cell discrete stencil, 2 the continuum jump condition read
/// literally. The reference tables are matched by kappa = 1.
struct PhysicalParams {
  Real hbar = 1.0;
  Real mass = 1.0;
  Real alpha = 0.0;    // spin energy half-gap
  Real beta = 0.0;     // point-interaction strength
  Real rho = 0.0;      // flip coupling
  Real p0 = 0.0;       // mean momentum of each packet
  Real sigma = 1.0;    // Gaussian width
  Real trunc_a = 1.0;  // support half-width of the truncated Gaussian
  Real x0 = 0.0;
  int kappa = 1;

  void validate() const;
};

struct Geometry {
  Real L = 1.0;  // half-domain length
  Real D = 0.5;  // cluster centre distance
  Real d = 0.1;  // intra-cluster spacing
  std::size_t num_spins = 0;

  void validate() const;
};

/// Uniform grid x_i = -L + i dx, i = 0..nx-1 (zero-based).
struct Grid {
  std::size_t nx = 0;
  Real L = 0.0;
  Real dx = 0.0;
  Eigen::VectorXd xs;
};

struct TimeGrid {
  Real t_star = 0.0;
  std::size_t steps = 0;

  Real dt() const { return t_star / static_cast<Real>(steps); }
  Real time(std::size_t k) const { return static_cast<Real>(k) * dt(); }
};

/// How the N/2 detectors of a cluster are laid out around +-D.
enum class LayoutRule {
  /// Positions from the lattice D + (2k+1) d/2 (k integer), taking the N/2
  /// sites closest to D with ties resolved toward the origin.
  Lattice,
  /// N/2 sites spaced by d and centred exactly on D.
  Centered,
};

struct DetectorLayout {
  std::vector<Real> nominal;  // requested positions, ascending
  std::vector<Real> positions;  // snapped to the grid
  std::vector<std::size_t> grid_indices;
  SideAssignment sides;

  std::size_t size() const { return grid_indices.size(); }
};

Grid build_grid(Real L, std::size_t nx);

/// Requested detector positions before grid snapping, ascending.
std::vector<Real> nominal_positions(const Geometry& geom, LayoutRule rule = LayoutRule::Lattice);

/// Nearest grid index, ties toward -infinity.
std::size_t snap_to_grid(Real y, const Grid& grid);

DetectorLayout place_detectors(const Geometry& geom, const Grid& grid,
                               LayoutRule rule = LayoutRule::Lattice);

/// Layout from arbitrary positions (any N, sorted internally). Throws
/// ConfigurationError on coincident or boundary indices.
DetectorLayout layout_from_positions(std::span<const Real> positions, const Grid& grid);

/// Empty when every detector has a mirrored partner index.
std::vector<std::string> layout_symmetry_warnings(const DetectorLayout& layout, const Grid& grid);

/// Normalised initial state: two counter-propagating truncated Gaussian
/// packets in channel 0, every other channel zero.
StateVector initial_state(const PhysicalParams& params, const Grid& grid, std::size_t channels);

/// One message per violated ordering beta << 1/d, d < sigma, sigma << D
/// ("<<" meaning a factor 10).
std::vector<std::string> validate_regime(const PhysicalParams& params, const Geometry& geom);

struct PresetOptions {
  Real epsilon = 0.1;
  std::size_t num_spins = 4;
  std::optional<Real> rho;
  int kappa = 1;
  std::size_t nx = 1000;
  std::size_t steps = 350;
};

struct Preset {
  PhysicalParams physics;
  Geometry geometry;
  Grid grid;
  TimeGrid time;
};

/// Reference configuration scaled by epsilon: L = 3/2, t* = 0.065,
/// hbar = eps, m = 1, D = L/3, d = eps/N, p0 = 4/(3 eps), sigma = eps/4,
/// alpha = beta = eps^4, rho = eps^-2, truncation a = D.
Preset preset_from_epsilon(const PresetOptions& options);

}  // namespace cloudchamber
