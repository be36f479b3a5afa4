#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cloudchamber {

/// LU factors of a tridiagonal matrix without pivoting (Thomas algorithm).
/// Stable for the diagonally dominant channel blocks of the Crank-Nicolson
/// operator.
template <typename Scalar>
struct TridiagonalFactor {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector lower;   // sub-diagonal, lower[0] unused
  Vector pivots;  // modified diagonal
  Vector upper;   // super-diagonal, upper[n-1] unused

  Eigen::Index size() const { return pivots.size(); }
};

template <typename Scalar, typename DerivedL, typename DerivedD, typename DerivedU>
TridiagonalFactor<Scalar> thomas_factor(const Eigen::MatrixBase<DerivedL>& lower,
                                        const Eigen::MatrixBase<DerivedD>& diag,
                                        const Eigen::MatrixBase<DerivedU>& upper) {
  const Eigen::Index n = diag.size();
  TridiagonalFactor<Scalar> f;
  f.lower = lower;
  f.upper = upper;
  f.pivots.resize(n);
  f.pivots[0] = diag[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    if (f.pivots[i - 1] == Scalar(0)) throw std::runtime_error("thomas_factor: zero pivot");
    f.pivots[i] = diag[i] - f.lower[i] * f.upper[i - 1] / f.pivots[i - 1];
  }
  if (n > 0 && f.pivots[n - 1] == Scalar(0)) throw std::runtime_error("thomas_factor: zero pivot");
  return f;
}

/// Solves in place: x <- T^{-1} x.
template <typename Scalar, typename Derived>
void thomas_solve(const TridiagonalFactor<Scalar>& f, Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = f.size();
  for (Eigen::Index i = 1; i < n; ++i) x[i] -= f.lower[i] / f.pivots[i - 1] * x[i - 1];
  x[n - 1] /= f.pivots[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = (x[i] - f.upper[i] * x[i + 1]) / f.pivots[i];
}

/// Eigen-compatible preconditioner that inverts the tridiagonal part of each
/// contiguous diagonal block of size `block_size()`, ignoring everything
/// outside the blocks.
template <typename Scalar>
class BlockTridiagonalPreconditioner {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  BlockTridiagonalPreconditioner() = default;

  void set_block_size(Eigen::Index n) { block_size_ = n; }
  Eigen::Index block_size() const { return block_size_; }

  Eigen::Index rows() const { return size_; }
  Eigen::Index cols() const { return size_; }

  template <typename MatType>
  BlockTridiagonalPreconditioner& analyzePattern(const MatType&) {
    return *this;
  }

  template <typename MatType>
  BlockTridiagonalPreconditioner& factorize(const MatType& mat) {
    size_ = mat.rows();
    if (block_size_ <= 0) block_size_ = size_;
    if (size_ % block_size_ != 0) throw std::invalid_argument("block size does not divide the matrix");
    Vector diag = Vector::Zero(size_);
    Vector lower = Vector::Zero(size_);
    Vector upper = Vector::Zero(size_);
    const Eigen::SparseMatrix<Scalar> m = mat;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(m, k); it; ++it) {
        const Eigen::Index r = it.row();
        const Eigen::Index c = it.col();
        if (r / block_size_ != c / block_size_) continue;
        if (r == c) diag[r] = it.value();
        else if (r == c + 1) lower[r] = it.value();
        else if (c == r + 1) upper[r] = it.value();
      }
    }
    blocks_.clear();
    for (Eigen::Index b = 0; b < size_; b += block_size_) {
      blocks_.push_back(thomas_factor<Scalar>(lower.segment(b, block_size_), diag.segment(b, block_size_),
                                              upper.segment(b, block_size_)));
    }
    ok_ = true;
    return *this;
  }

  template <typename MatType>
  BlockTridiagonalPreconditioner& compute(const MatType& mat) {
    return factorize(mat);
  }

  template <typename Rhs, typename Dest>
  void _solve_impl(const Rhs& b, Dest& x) const {
    x = b;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      auto seg = x.segment(static_cast<Eigen::Index>(k) * block_size_, block_size_);
      thomas_solve(blocks_[k], seg);
    }
  }

  template <typename Rhs>
  inline const Eigen::Solve<BlockTridiagonalPreconditioner, Rhs> solve(const Eigen::MatrixBase<Rhs>& b) const {
    return Eigen::Solve<BlockTridiagonalPreconditioner, Rhs>(*this, b.derived());
  }

  Eigen::ComputationInfo info() const { return ok_ ? Eigen::Success : Eigen::NumericalIssue; }

 private:
  Eigen::Index size_ = 0;
  Eigen::Index block_size_ = 0;
  std::vector<TridiagonalFactor<Scalar>> blocks_;
  bool ok_ = false;
};

}  // namespace cloudchamber
