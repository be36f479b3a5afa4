#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cloudchamber/assembly.hpp"
#include "cloudchamber/observables.hpp"
#include "cloudchamber/state.hpp"

namespace cloudchamber {

enum class SolveMethod {
  Direct,     // sparse LU, factored once per run
  Iterative,  // BiCGSTAB preconditioned by per-channel tridiagonal solves
};

struct SolveConfig {
  SolveMethod method = SolveMethod::Direct;
  Real tolerance = 1e-12;  // relative residual
  std::size_t max_iterations = 1000;

  void validate() const;
};

/// Solver for A x = b with a fixed A. The factorisation (or preconditioner)
/// is built once in the constructor and reused by every solve.
class LinearSolver {
 public:
  /// `block_size` is the channel length used by the iterative
  /// preconditioner; 0 treats A as a single block.
  LinearSolver(const SparseMatrix& a, const SolveConfig& cfg, std::size_t block_size = 0);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;

  /// Throws SolverError when the relative residual exceeds the tolerance and
  /// NumericalError on non-finite output.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

  const SolveConfig& config() const { return cfg_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SolveConfig cfg_;
};

/// One-shot solve (factors A for this call only).
Eigen::VectorXcd solve_linear(const SparseMatrix& a, const Eigen::VectorXcd& rhs, const SolveConfig& cfg);

/// Builds the solver for the left operator of `system`.
LinearSolver make_step_solver(const CNSystem& system, const SolveConfig& cfg);

/// psi^{k+1} = A^{-1} B psi^k.
StateVector step(const CNSystem& system, const LinearSolver& solver, const StateVector& state);

/// Convenience overload that factors A for this single step.
StateVector step(const CNSystem& system, const StateVector& state, const SolveConfig& cfg);

/// Called after every step with (k, t_k, state); must not retain the reference.
using Observer = std::function<void(std::size_t, Real, const StateVector&)>;

struct RunOptions {
  SolveConfig solve;
  SideAssignment sides;
  /// Full-state snapshot every `snapshot_stride` steps; 0 keeps only the
  /// initial and final states.
  std::size_t snapshot_stride = 0;
};

struct RunRecord {
  std::vector<StepSample> series;  // K + 1 entries, step 0 first
  StateVector final_state;
  std::vector<std::pair<std::size_t, StateVector>> snapshots;
  std::vector<std::string> warnings;
};

RunRecord run(const CNSystem& system, const StateVector& initial, std::size_t steps,
              const RunOptions& options, std::span<const Observer> observers = {});

}  // namespace cloudchamber
