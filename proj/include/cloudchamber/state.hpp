#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cloudchamber {

using Real = double;
using Complex = std::complex<Real>;

/// Bad physical or numerical parameter value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry that cannot be realised on the chosen grid.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solve that did not reach its residual target.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Full system wavefunction on the grid, one contiguous block of `nx`
/// samples per spin channel (channel-major: index = mask * nx + i).
struct StateVector {
  Eigen::VectorXcd values;
  std::size_t channels = 0;
  std::size_t nx = 0;
  Real dx = 0.0;

  StateVector() = default;
  StateVector(std::size_t num_channels, std::size_t num_points, Real spacing)
      : values(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(num_channels * num_points))),
        channels(num_channels),
        nx(num_points),
        dx(spacing) {}

  Eigen::Index size() const { return values.size(); }

  auto channel(std::size_t mask) {
    return values.segment(static_cast<Eigen::Index>(mask * nx), static_cast<Eigen::Index>(nx));
  }
  auto channel(std::size_t mask) const {
    return values.segment(static_cast<Eigen::Index>(mask * nx), static_cast<Eigen::Index>(nx));
  }

  /// Discrete squared norm dx * sum |psi|^2.
  Real norm2() const { return dx * values.squaredNorm(); }

  bool same_shape(const StateVector& other) const {
    return channels == other.channels && nx == other.nx && dx == other.dx;
  }
};

/// Discrete inner product dx * sum conj(u) v.
template <typename DerivedU, typename DerivedV>
Complex inner_product(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                      Real dx) {
  return dx * u.dot(v);
}

template <typename Derived>
Real discrete_norm2(const Eigen::MatrixBase<Derived>& v, Real dx) {
  return dx * v.squaredNorm();
}

}  // namespace cloudchamber
