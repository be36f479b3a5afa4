#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "cloudchamber/model.hpp"
#include "cloudchamber/state.hpp"

namespace cloudchamber {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

enum class BoundaryMode {
  /// Neumann via ghost points psi_0 = psi_2: the first and last
  /// off-diagonal of every channel are doubled (not Hermitian on those rows).
  Ghost,
  /// Plain symmetric boundary rows, exactly Hermitian.
  Symmetrized,
};

/// Cross-channel entry at a detector site, (sigma, i_j) -> (flip_j(sigma), i_j).
struct Coupling {
  std::size_t row = 0;
  std::size_t col = 0;
  Complex value;
};

/// Discrete Hamiltonian: one tridiagonal block per channel plus N flip
/// couplings per channel. Row/column index is mask * nx + i.
///
/// `lower[r]` holds H(r, r-1) and `upper[r]` holds H(r, r+1); both are zero
/// where the neighbour lies in a different channel.
struct DiscreteHamiltonian {
  std::size_t channels = 0;
  std::size_t nx = 0;
  std::size_t num_spins = 0;
  Real dx = 0.0;
  Eigen::VectorXcd diag;
  Eigen::VectorXcd lower;
  Eigen::VectorXcd upper;
  std::vector<Coupling> couplings;  // sorted by row

  std::size_t dimension() const { return channels * nx; }

  /// Structural nonzeros: (3 nx - 2) per channel plus the couplings.
  std::size_t nnz() const { return (3 * nx - 2) * channels + couplings.size(); }

  /// out = H in (out must not alias in).
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  SparseMatrix to_sparse() const;

  /// Largest absolute row sum; an upper bound for the spectral radius.
  Real row_sum_norm() const;
};

DiscreteHamiltonian assemble_hamiltonian(const PhysicalParams& params, const Grid& grid,
                                         const DetectorLayout& layout,
                                         BoundaryMode boundary = BoundaryMode::Ghost);

StateVector apply_h(const DiscreteHamiltonian& h, const StateVector& v);

/// Coordinate dump: one "row col re im" line per stored entry.
void write_coordinates(const DiscreteHamiltonian& h, std::ostream& os);

/// Crank-Nicolson pair A = I + c H, B = I - c H with c = i dt / (2 hbar).
/// A and B are applied from H on the fly and materialised only on request.
class CNSystem {
 public:
  CNSystem(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar);

  const DiscreteHamiltonian& hamiltonian() const { return *h_; }
  std::shared_ptr<const DiscreteHamiltonian> hamiltonian_ptr() const { return h_; }
  Real dt() const { return dt_; }
  Real hbar() const { return hbar_; }
  Complex half_step() const { return half_step_; }
  std::size_t dimension() const { return h_->dimension(); }

  void apply_left(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  void apply_right(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  SparseMatrix left_matrix() const;
  SparseMatrix right_matrix() const;

  /// The same scheme run backwards in time (A and B exchanged).
  CNSystem reversed() const;

 private:
  CNSystem(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar, Complex half_step);

  std::shared_ptr<const DiscreteHamiltonian> h_;
  Real dt_;
  Real hbar_;
  Complex half_step_;
};

CNSystem assemble_cn(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar);

}  // namespace cloudchamber
