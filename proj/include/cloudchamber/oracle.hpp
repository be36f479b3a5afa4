#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "cloudchamber/assembly.hpp"
#include "cloudchamber/model.hpp"
#include "cloudchamber/state.hpp"

namespace cloudchamber::oracle {

inline constexpr std::size_t kMaxDenseDimension = 2048;

/// Dense reference operators, written out row by row from the finite
/// difference stencils without going through the sparse assembly.
struct DenseSystem {
  Eigen::MatrixXcd h;
  Eigen::MatrixXcd left;
  Eigen::MatrixXcd right;
};

DenseSystem build_dense_system(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                               BoundaryMode boundary, Real dt);

/// K Crank-Nicolson steps from `initial` with a dense LU.
StateVector dense_run(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                      BoundaryMode boundary, const TimeGrid& time, const StateVector& initial);

/// Same, starting from initial_state().
StateVector dense_run(const PhysicalParams& params, const Grid& grid, const DetectorLayout& layout,
                      BoundaryMode boundary, const TimeGrid& time);

struct Comparison {
  Real max_abs_diff = 0.0;
  Real norm_diff = 0.0;  // | ||a|| - ||b|| | with the dx-weighted norm
};

Comparison compare(const StateVector& a, const StateVector& b);

}  // namespace cloudchamber::oracle
