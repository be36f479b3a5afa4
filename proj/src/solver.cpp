#include "cloudchamber/solver.hpp"

#include <cmath>
#include <cstdio>
#include <variant>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "cloudchamber/tridiagonal.hpp"

namespace cloudchamber {

namespace {

using DirectSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
using IterativeSolver = Eigen::BiCGSTAB<SparseMatrix, BlockTridiagonalPreconditioner<Complex>>;

std::string sci(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

constexpr int kRestarts = 3;

}  // namespace

void SolveConfig::validate() const {
  if (!(tolerance > 0.0 && tolerance <= 1e-6)) {
    throw ParameterError("solver tolerance must lie in (0, 1e-6], got " + sci(tolerance));
  }
  if (max_iterations == 0) throw ParameterError("max_iterations must be positive");
}

struct LinearSolver::Impl {
  SparseMatrix a;
  std::variant<std::unique_ptr<DirectSolver>, std::unique_ptr<IterativeSolver>> solver;
};

LinearSolver::LinearSolver(const SparseMatrix& a, const SolveConfig& cfg, std::size_t block_size)
    : impl_(std::make_unique<Impl>()), cfg_(cfg) {
  cfg_.validate();
  if (a.rows() != a.cols()) throw std::invalid_argument("LinearSolver: matrix is not square");
  impl_->a = a;
  impl_->a.makeCompressed();
  if (cfg_.method == SolveMethod::Direct) {
    auto lu = std::make_unique<DirectSolver>();
    lu->analyzePattern(impl_->a);
    lu->factorize(impl_->a);
    if (lu->info() != Eigen::Success) {
      throw SolverError("sparse LU factorisation failed: " + lu->lastErrorMessage(), INFINITY);
    }
    impl_->solver = std::move(lu);
  } else {
    auto it = std::make_unique<IterativeSolver>();
    it->preconditioner().set_block_size(static_cast<Eigen::Index>(block_size));
    it->setTolerance(cfg_.tolerance);
    it->setMaxIterations(static_cast<Eigen::Index>(cfg_.max_iterations));
    it->compute(impl_->a);
    if (it->info() != Eigen::Success) throw SolverError("preconditioner setup failed", INFINITY);
    impl_->solver = std::move(it);
  }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXcd LinearSolver::solve(const Eigen::VectorXcd& rhs) const {
  const SparseMatrix& a = impl_->a;
  if (rhs.size() != a.rows()) throw std::invalid_argument("LinearSolver: rhs length mismatch");
  if (!rhs.allFinite()) throw NumericalError("non-finite right-hand side");
  const Real rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Eigen::VectorXcd::Zero(rhs.size());

  Eigen::VectorXcd x;
  Real residual = 0.0;
  if (const auto* lu = std::get_if<std::unique_ptr<DirectSolver>>(&impl_->solver)) {
    x = (*lu)->solve(rhs);
    residual = (a * x - rhs).norm() / rhs_norm;
  } else {
    const auto& it = *std::get<std::unique_ptr<IterativeSolver>>(impl_->solver);
    x = it.solve(rhs);
    residual = (a * x - rhs).norm() / rhs_norm;
    // The recursive residual can drift from the true one; restart from x.
    for (int r = 0; r < kRestarts && residual > cfg_.tolerance && it.info() == Eigen::Success; ++r) {
      x = it.solveWithGuess(rhs, x);
      residual = (a * x - rhs).norm() / rhs_norm;
    }
  }
  if (!x.allFinite()) throw NumericalError("linear solve produced non-finite values");
  if (!(residual <= cfg_.tolerance)) {
    throw SolverError("linear solve residual " + sci(residual) + " exceeds tolerance " + sci(cfg_.tolerance),
                      residual);
  }
  return x;
}

Eigen::VectorXcd solve_linear(const SparseMatrix& a, const Eigen::VectorXcd& rhs, const SolveConfig& cfg) {
  return LinearSolver(a, cfg).solve(rhs);
}

LinearSolver make_step_solver(const CNSystem& system, const SolveConfig& cfg) {
  return LinearSolver(system.left_matrix(), cfg, system.hamiltonian().nx);
}

StateVector step(const CNSystem& system, const LinearSolver& solver, const StateVector& state) {
  if (static_cast<std::size_t>(state.size()) != system.dimension()) {
    throw std::invalid_argument("step: state length does not match the system");
  }
  if (!state.values.allFinite()) throw NumericalError("step: non-finite input state");
  Eigen::VectorXcd rhs;
  system.apply_right(state.values, rhs);
  StateVector next(state.channels, state.nx, state.dx);
  next.values = solver.solve(rhs);
  return next;
}

StateVector step(const CNSystem& system, const StateVector& state, const SolveConfig& cfg) {
  return step(system, make_step_solver(system, cfg), state);
}

RunRecord run(const CNSystem& system, const StateVector& initial, std::size_t steps, const RunOptions& options,
              std::span<const Observer> observers) {
  if (steps == 0) throw ParameterError("run needs at least one step");
  const DiscreteHamiltonian& h = system.hamiltonian();
  if (initial.channels != h.channels || initial.nx != h.nx) {
    throw std::invalid_argument("run: initial state shape does not match the system");
  }

  RunRecord record;
  const Real accuracy_limit = 2.0 * system.hbar() / h.row_sum_norm();
  if (system.dt() > accuracy_limit) {
    record.warnings.push_back("dt = " + sci(system.dt()) + " exceeds 2 hbar/|H| = " + sci(accuracy_limit) +
                              "; the scheme stays stable but fast phases are under-resolved");
  }

  const LinearSolver solver = make_step_solver(system, options.solve);
  auto sample = [&](std::size_t k, const StateVector& psi) {
    const Real t = static_cast<Real>(k) * system.dt();
    StepSample s;
    s.step = k;
    s.t = t;
    s.norm2 = psi.norm2();
    s.energy = energy(psi, h);
    s.classes = class_probs(channel_probs(psi, t), options.sides);
    record.series.push_back(s);
  };

  record.series.reserve(steps + 1);
  StateVector psi = initial;
  sample(0, psi);
  record.snapshots.emplace_back(0, psi);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      psi = step(system, solver, psi);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(k) + ": " + e.what(), e.residual());
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(k) + ": " + e.what());
    }
    sample(k, psi);
    for (const auto& obs : observers) obs(k, record.series.back().t, psi);
    if (k != steps && options.snapshot_stride != 0 && k % options.snapshot_stride == 0) {
      record.snapshots.emplace_back(k, psi);
    }
  }
  record.snapshots.emplace_back(steps, psi);
  record.final_state = std::move(psi);
  return record;
}

}  // namespace cloudchamber
