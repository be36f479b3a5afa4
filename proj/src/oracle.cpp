#include "cloudchamber/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace cloudchamber::oracle {

DenseSystem build_dense_system(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                               BoundaryMode boundary, Real dt) {
  const std::size_t n_spins = layout.grid_indices.size();
  const std::size_t n_channels = std::size_t{1} << n_spins;
  const std::size_t nx = grid.nx;
  const std::size_t dim = n_channels * nx;
  if (dim > kMaxDenseDimension) {
    throw std::invalid_argument("dense oracle limited to dimension " + std::to_string(kMaxDenseDimension) +
                                ", requested " + std::to_string(dim));
  }

  const Real hb2m = params.hbar * params.hbar / (2.0 * params.mass);
  const Real inv_dx2 = 1.0 / (grid.dx * grid.dx);
  const Complex i_unit(0.0, 1.0);

  DenseSystem sys;
  sys.h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto& h = sys.h;
  for (std::size_t s = 0; s < n_channels; ++s) {
    int up = 0;
    for (std::size_t j = 0; j < n_spins; ++j) up += static_cast<int>((s >> j) & 1U);
    const Real level = params.alpha * static_cast<Real>(up - (static_cast<int>(n_spins) - up));

    for (std::size_t i = 0; i < nx; ++i) {
      const auto row = static_cast<Eigen::Index>(s * nx + i);
      // -hbar^2/2m * (psi_{i+1} - 2 psi_i + psi_{i-1}) / dx^2
      h(row, row) += hb2m * 2.0 * inv_dx2 + level;
      if (i == 0) {
        const Real w = boundary == BoundaryMode::Ghost ? 2.0 : 1.0;  // psi_{-1} = psi_{1}
        h(row, row + 1) += -hb2m * w * inv_dx2;
      } else if (i == nx - 1) {
        const Real w = boundary == BoundaryMode::Ghost ? 2.0 : 1.0;
        h(row, row - 1) += -hb2m * w * inv_dx2;
      } else {
        h(row, row - 1) += -hb2m * inv_dx2;
        h(row, row + 1) += -hb2m * inv_dx2;
      }
    }

    // Interface rows: -hbar^2/2m [ ... - beta/dx psi_s + i sigma_j rho/dx psi_s' ]
    for (std::size_t j = 0; j < n_spins; ++j) {
      const std::size_t i = layout.grid_indices[j];
      const auto row = static_cast<Eigen::Index>(s * nx + i);
      const std::size_t partner = s ^ (std::size_t{1} << j);
      const auto col = static_cast<Eigen::Index>(partner * nx + i);
      const Real sigma_j = ((s >> j) & 1U) ? 1.0 : -1.0;
      h(row, row) += -hb2m * (-params.beta / grid.dx);
      h(row, col) += -hb2m * i_unit * sigma_j * static_cast<Real>(params.kappa) * params.rho / grid.dx;
    }
  }

  const Complex c = i_unit * dt / (2.0 * params.hbar);
  const auto identity = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  sys.left = identity + c * h;
  sys.right = identity - c * h;
  return sys;
}

StateVector dense_run(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                      BoundaryMode boundary, const TimeGrid& time, const StateVector& initial) {
  const DenseSystem sys = build_dense_system(params, grid, layout, boundary, time.dt());
  if (initial.size() != sys.h.rows()) throw std::invalid_argument("dense_run: initial state has wrong length");
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.left);
  StateVector psi = initial;
  for (std::size_t k = 0; k < time.steps; ++k) {
    const Eigen::VectorXcd rhs = sys.right * psi.values;
    psi.values = lu.solve(rhs);
  }
  return psi;
}

StateVector dense_run(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                      BoundaryMode boundary, const TimeGrid& time) {
  const std::size_t channels = std::size_t{1} << layout.grid_indices.size();
  return dense_run(params, grid, layout, boundary, time, initial_state(params, grid, channels));
}

Comparison compare(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("compare: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  Comparison c;
  c.max_abs_diff = a.size() == 0 ? 0.0 : (a.values - b.values).cwiseAbs().maxCoeff();
  c.norm_diff = std::abs(std::sqrt(a.norm2()) - std::sqrt(b.norm2()));
  return c;
}

}  // namespace cloudchamber::oracle
