#include <doctest.h>

#include <random>

#include "cloudchamber/oracle.hpp"
#include "cloudchamber/solver.hpp"

using namespace cloudchamber;

namespace {

Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {dist(rng), dist(rng)};
  return v;
}

SparseMatrix random_hermitian_plus_identity(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> dist;
  std::vector<Eigen::Triplet<Complex>> t;
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, Complex(4.0 + std::abs(dist(rng)), 0.0));
    if (i + 1 < n) {
      const Complex z(dist(rng), dist(rng));
      t.emplace_back(i, i + 1, z);
      t.emplace_back(i + 1, i, std::conj(z));
    }
  }
  SparseMatrix h(n, n);
  h.setFromTriplets(t.begin(), t.end());
  SparseMatrix id(n, n);
  id.setIdentity();
  return (id + Complex(0.0, 0.3) * h).eval();
}

struct Small {
  PhysicalParams physics;
  Grid grid;
  DetectorLayout layout;
  TimeGrid time;
};

// N = 2 on a 100-point grid, detectors at +-0.5.
Small small_case(Real rho, std::size_t steps = 50) {
  Small s;
  s.physics.hbar = 0.1;
  s.physics.mass = 1.0;
  s.physics.alpha = 1e-4;
  s.physics.beta = 1e-4;
  s.physics.rho = rho;
  s.physics.p0 = 40.0 / 3.0;
  s.physics.sigma = 0.1;
  s.physics.trunc_a = 0.5;
  s.grid = build_grid(1.5, 100);
  const std::vector<Real> ys{-0.5, 0.5};
  s.layout = layout_from_positions(ys, s.grid);
  s.time = TimeGrid{0.065, steps};
  return s;
}

std::shared_ptr<const DiscreteHamiltonian> hamiltonian(const Small& s, BoundaryMode mode = BoundaryMode::Ghost) {
  return std::make_shared<const DiscreteHamiltonian>(assemble_hamiltonian(s.physics, s.grid, s.layout, mode));
}

}  // namespace

TEST_CASE("identity system solves exactly") {
  SparseMatrix id(30, 30);
  id.setIdentity();
  std::mt19937 rng(1);
  const Eigen::VectorXcd b = random_vector(30, rng);
  for (auto method : {SolveMethod::Direct, SolveMethod::Iterative}) {
    const Eigen::VectorXcd x = solve_linear(id, b, SolveConfig{method});
    CHECK((x - b).norm() <= 1e-14 * b.norm());
  }
  CHECK(solve_linear(id, Eigen::VectorXcd::Zero(30), {}).norm() == 0.0);
}

TEST_CASE("random Hermitian-shifted systems meet the residual target") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const SparseMatrix a = random_hermitian_plus_identity(400, rng);
    const Eigen::VectorXcd b = random_vector(400, rng);
    for (auto method : {SolveMethod::Direct, SolveMethod::Iterative}) {
      const Eigen::VectorXcd x = solve_linear(a, b, SolveConfig{method});
      CHECK((a * x - b).norm() <= 1e-12 * b.norm());
    }
  }
}

TEST_CASE("solve config validation") {
  CHECK_THROWS_AS((SolveConfig{SolveMethod::Direct, 0.0}).validate(), ParameterError);
  CHECK_THROWS_AS((SolveConfig{SolveMethod::Direct, 1e-3}).validate(), ParameterError);
  CHECK_NOTHROW((SolveConfig{SolveMethod::Iterative, 1e-10}).validate());
}

TEST_CASE("one factorisation serves many right-hand sides") {
  std::mt19937 rng(5);
  const SparseMatrix a = random_hermitian_plus_identity(300, rng);
  const LinearSolver solver(a, SolveConfig{});
  Real worst = 0.0;
  for (int k = 0; k < 350; ++k) {
    const Eigen::VectorXcd b = random_vector(300, rng);
    const Eigen::VectorXcd reused = solver.solve(b);
    const Eigen::VectorXcd fresh = solve_linear(a, b, SolveConfig{});
    worst = std::max(worst, (reused - fresh).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("zero Hamiltonian step is the identity") {
  auto h = std::make_shared<DiscreteHamiltonian>();
  h->channels = 2;
  h->nx = 10;
  h->dx = 0.1;
  h->diag = h->lower = h->upper = Eigen::VectorXcd::Zero(20);
  const CNSystem cn(h, 0.01, 1.0);
  std::mt19937 rng(2);
  StateVector psi(2, 10, 0.1);
  psi.values = random_vector(20, rng);
  const StateVector next = step(cn, psi, SolveConfig{});
  CHECK((next.values - psi.values).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("free single channel keeps its norm") {
  Small s = small_case(0.0);
  s.physics.alpha = s.physics.beta = 0.0;
  const auto h = hamiltonian(s, BoundaryMode::Symmetrized);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const StateVector psi0 = initial_state(s.physics, s.grid, 4);
  const RunRecord rec = run(cn, psi0, 200, RunOptions{{}, s.layout.sides, 0});
  for (const auto& sample : rec.series) REQUIRE(std::abs(sample.norm2 - 1.0) <= 1e-12);
}

TEST_CASE("production steps agree with the dense oracle") {
  for (Real rho : {0.0, 10.0, 100.0}) {
    const Small s = small_case(rho);
    const auto h = hamiltonian(s);
    const CNSystem cn(h, s.time.dt(), s.physics.hbar);
    const StateVector psi0 = initial_state(s.physics, s.grid, 4);
    const RunRecord rec = run(cn, psi0, s.time.steps, RunOptions{{}, s.layout.sides, 0});
    const StateVector ref = oracle::dense_run(s.physics, s.grid, s.layout, BoundaryMode::Ghost, s.time);
    CHECK(oracle::compare(rec.final_state, ref).max_abs_diff <= 1e-10);

    // A single step too.
    const StateVector one = step(cn, psi0, SolveConfig{});
    const StateVector one_ref =
        oracle::dense_run(s.physics, s.grid, s.layout, BoundaryMode::Ghost, TimeGrid{s.time.dt(), 1});
    CHECK(oracle::compare(one, one_ref).max_abs_diff <= 1e-10);
  }
}

TEST_CASE("run bookkeeping") {
  const Small s = small_case(100.0, 20);
  const auto h = hamiltonian(s);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const StateVector psi0 = initial_state(s.physics, s.grid, 4);

  std::vector<std::size_t> seen;
  const std::vector<Observer> observers{[&](std::size_t k, Real t, const StateVector& st) {
    seen.push_back(k);
    CHECK(t == doctest::Approx(static_cast<Real>(k) * s.time.dt()));
    CHECK(st.channels == 4);
  }};
  const RunRecord rec = run(cn, psi0, 20, RunOptions{{}, s.layout.sides, 5}, observers);
  CHECK(rec.series.size() == 21);
  CHECK(rec.series.front().step == 0);
  CHECK(rec.series.back().step == 20);
  REQUIRE(seen.size() == 20);
  CHECK(seen.front() == 1);
  CHECK(seen.back() == 20);
  std::vector<std::size_t> snap_steps;
  for (const auto& [k, st] : rec.snapshots) snap_steps.push_back(k);
  CHECK(snap_steps == std::vector<std::size_t>{0, 5, 10, 15, 20});

  CHECK_THROWS_AS(run(cn, psi0, 0, RunOptions{{}, s.layout.sides, 0}), ParameterError);
  StateVector wrong(2, 100, s.grid.dx);
  CHECK_THROWS(run(cn, wrong, 5, RunOptions{{}, s.layout.sides, 0}));
}

TEST_CASE("rho = 0 never leaves the unflipped channel") {
  const Small s = small_case(0.0);
  const auto h = hamiltonian(s);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const RunRecord rec = run(cn, initial_state(s.physics, s.grid, 4), 50, RunOptions{{}, s.layout.sides, 0});
  for (const auto& sample : rec.series) {
    REQUIRE(std::abs(sample.classes.unchanged - 1.0) <= 1e-12);
    REQUIRE(sample.classes.one_spin == 0.0);
    REQUIRE(sample.classes.multiple_tracks == 0.0);
  }
  CHECK(rec.final_state.values.segment(100, 300).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("running backwards recovers the initial state") {
  const Small s = small_case(100.0, 50);
  const auto h = hamiltonian(s);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const StateVector psi0 = initial_state(s.physics, s.grid, 4);
  const RunRecord fwd = run(cn, psi0, 50, RunOptions{{}, s.layout.sides, 0});
  const RunRecord back = run(cn.reversed(), fwd.final_state, 50, RunOptions{{}, s.layout.sides, 0});
  CHECK(oracle::compare(back.final_state, psi0).max_abs_diff <= 1e-8);
}

TEST_CASE("runs are bitwise deterministic") {
  const Small s = small_case(100.0, 30);
  const auto h = hamiltonian(s);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const StateVector psi0 = initial_state(s.physics, s.grid, 4);
  const RunRecord a = run(cn, psi0, 30, RunOptions{{}, s.layout.sides, 0});
  const RunRecord b = run(cn, psi0, 30, RunOptions{{}, s.layout.sides, 0});
  CHECK((a.final_state.values.array() == b.final_state.values.array()).all());
  for (std::size_t k = 0; k < a.series.size(); ++k) {
    REQUIRE(a.series[k].energy == b.series[k].energy);
    REQUIRE(a.series[k].classes.unchanged == b.series[k].classes.unchanged);
  }
}

TEST_CASE("iterative and direct solvers agree") {
  const Small s = small_case(100.0, 30);
  const auto h = hamiltonian(s);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const StateVector psi0 = initial_state(s.physics, s.grid, 4);
  const RunRecord direct = run(cn, psi0, 30, RunOptions{{SolveMethod::Direct}, s.layout.sides, 0});
  const RunRecord iter = run(cn, psi0, 30, RunOptions{{SolveMethod::Iterative}, s.layout.sides, 0});
  CHECK(oracle::compare(direct.final_state, iter.final_state).max_abs_diff <= 1e-10);
}

TEST_CASE("norm is conserved in the exactly Hermitian mode") {
  const Small s = small_case(100.0, 100);
  const auto h = hamiltonian(s, BoundaryMode::Symmetrized);
  const CNSystem cn(h, s.time.dt(), s.physics.hbar);
  const RunRecord rec = run(cn, initial_state(s.physics, s.grid, 4), 100, RunOptions{{}, s.layout.sides, 0});
  const Real e0 = rec.series.front().energy;
  for (const auto& sample : rec.series) {
    REQUIRE(std::abs(sample.norm2 - 1.0) <= 1e-11);
    REQUIRE(std::abs(sample.energy - e0) <= 1e-9 * std::abs(e0));
  }
}
