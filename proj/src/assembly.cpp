#include "cloudchamber/assembly.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "cloudchamber/spinspace.hpp"

namespace cloudchamber {

namespace {

using Index = Eigen::Index;

SparseMatrix shifted_sparse(const DiscreteHamiltonian& h, Complex identity, Complex scale) {
  const std::size_t n = h.dimension();
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(h.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    const Index ri = static_cast<Index>(r);
    const std::size_t i = r % h.nx;
    if (i > 0) triplets.emplace_back(ri, ri - 1, scale * h.lower[ri]);
    triplets.emplace_back(ri, ri, identity + scale * h.diag[ri]);
    if (i + 1 < h.nx) triplets.emplace_back(ri, ri + 1, scale * h.upper[ri]);
  }
  for (const auto& c : h.couplings) {
    triplets.emplace_back(static_cast<Index>(c.row), static_cast<Index>(c.col), scale * c.value);
  }
  SparseMatrix m(static_cast<Index>(n), static_cast<Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

void DiscreteHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  const std::size_t n = dimension();
  if (static_cast<std::size_t>(in.size()) != n) {
    throw std::invalid_argument("apply: vector length " + std::to_string(in.size()) +
                                " does not match dimension " + std::to_string(n));
  }
  out.resize(static_cast<Index>(n));
  for (std::size_t m = 0; m < channels; ++m) {
    const Index base = static_cast<Index>(m * nx);
    const Index last = base + static_cast<Index>(nx) - 1;
    out[base] = diag[base] * in[base] + upper[base] * in[base + 1];
    for (Index r = base + 1; r < last; ++r) {
      out[r] = lower[r] * in[r - 1] + diag[r] * in[r] + upper[r] * in[r + 1];
    }
    out[last] = lower[last] * in[last - 1] + diag[last] * in[last];
  }
  for (const auto& c : couplings) {
    out[static_cast<Index>(c.row)] += c.value * in[static_cast<Index>(c.col)];
  }
}

SparseMatrix DiscreteHamiltonian::to_sparse() const { return shifted_sparse(*this, 0.0, 1.0); }

Real DiscreteHamiltonian::row_sum_norm() const {
  Eigen::VectorXd sums = diag.cwiseAbs() + lower.cwiseAbs() + upper.cwiseAbs();
  for (const auto& c : couplings) sums[static_cast<Index>(c.row)] += std::abs(c.value);
  return sums.size() == 0 ? 0.0 : sums.maxCoeff();
}

DiscreteHamiltonian assemble_hamiltonian(const PhysicalParams& params, const Grid& grid,
                                         const DetectorLayout& layout, BoundaryMode boundary) {
  params.validate();
  const std::size_t num_spins = layout.size();
  const std::size_t channels = channel_count(num_spins);
  const std::size_t nx = grid.nx;
  if (nx < 3) throw ParameterError("grid needs at least 3 points");
  for (std::size_t idx : layout.grid_indices) {
    if (idx == 0 || idx + 1 >= nx) {
      throw ConfigurationError("detector at boundary grid index " + std::to_string(idx) +
                               "; the interface stencil needs both neighbours");
    }
  }

  DiscreteHamiltonian h;
  h.channels = channels;
  h.nx = nx;
  h.num_spins = num_spins;
  h.dx = grid.dx;
  const Index n = static_cast<Index>(channels * nx);
  h.diag = Eigen::VectorXcd::Zero(n);
  h.lower = Eigen::VectorXcd::Zero(n);
  h.upper = Eigen::VectorXcd::Zero(n);

  const Real kinetic = params.hbar * params.hbar / (params.mass * grid.dx * grid.dx);
  const Real hop = -0.5 * kinetic;
  const Real edge = boundary == BoundaryMode::Ghost ? 2.0 * hop : hop;
  // -hbar^2/(2m) * (-beta/dx) and -hbar^2/(2m) * (i sigma_j kappa rho / dx)
  const Real point = params.hbar * params.hbar * params.beta / (2.0 * params.mass * grid.dx);
  const Real flip = params.kappa * params.rho * params.hbar * params.hbar / (2.0 * params.mass * grid.dx);

  for (std::size_t m = 0; m < channels; ++m) {
    const SpinConfig sigma{static_cast<std::uint32_t>(m)};
    const Real level = params.alpha * static_cast<Real>(spin_sum(sigma, num_spins));
    const Index base = static_cast<Index>(m * nx);
    const Index last = base + static_cast<Index>(nx) - 1;
    h.diag.segment(base, static_cast<Index>(nx)).setConstant(kinetic + level);
    h.lower.segment(base + 1, static_cast<Index>(nx) - 1).setConstant(hop);
    h.upper.segment(base, static_cast<Index>(nx) - 1).setConstant(hop);
    h.upper[base] = edge;
    h.lower[last] = edge;

    for (std::size_t j = 0; j < num_spins; ++j) {
      const std::size_t row = m * nx + layout.grid_indices[j];
      h.diag[static_cast<Index>(row)] += point;
      const SpinConfig partner = flip_partner(sigma, j, num_spins);
      const Real s = static_cast<Real>(spin_value(sigma, j));
      h.couplings.push_back({row, partner.mask * nx + layout.grid_indices[j], Complex(0.0, -s * flip)});
    }
  }
  std::sort(h.couplings.begin(), h.couplings.end(),
            [](const Coupling& a, const Coupling& b) { return a.row < b.row; });
  return h;
}

StateVector apply_h(const DiscreteHamiltonian& h, const StateVector& v) {
  if (v.channels != h.channels || v.nx != h.nx) {
    throw std::invalid_argument("apply_h: state shape does not match the Hamiltonian");
  }
  StateVector out(v.channels, v.nx, v.dx);
  h.apply(v.values, out.values);
  return out;
}

void write_coordinates(const DiscreteHamiltonian& h, std::ostream& os) {
  const SparseMatrix m = h.to_sparse();
  const auto precision = os.precision(17);
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  os.precision(precision);
}

CNSystem::CNSystem(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar)
    : CNSystem(std::move(h), dt, hbar, Complex(0.0, dt / (2.0 * hbar))) {}

CNSystem::CNSystem(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar, Complex half_step)
    : h_(std::move(h)), dt_(dt), hbar_(hbar), half_step_(half_step) {
  if (!h_) throw std::invalid_argument("CNSystem needs a Hamiltonian");
  if (!(dt_ > 0.0)) throw ParameterError("time step must be positive");
  if (!(hbar_ > 0.0)) throw ParameterError("hbar must be positive");
}

void CNSystem::apply_left(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  h_->apply(in, out);
  out = in + half_step_ * out;
}

void CNSystem::apply_right(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  h_->apply(in, out);
  out = in - half_step_ * out;
}

SparseMatrix CNSystem::left_matrix() const { return shifted_sparse(*h_, 1.0, half_step_); }

SparseMatrix CNSystem::right_matrix() const { return shifted_sparse(*h_, 1.0, -half_step_); }

CNSystem CNSystem::reversed() const { return CNSystem(h_, dt_, hbar_, -half_step_); }

CNSystem assemble_cn(std::shared_ptr<const DiscreteHamiltonian> h, Real dt, Real hbar) {
  return CNSystem(std::move(h), dt, hbar);
}

}  // namespace cloudchamber
