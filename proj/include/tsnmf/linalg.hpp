#ifndef TSNMF_LINALG_HPP
#define TSNMF_LINALG_HPP

// Small dense kernel shared by the solver, the graph builder and the baselines.
// Everything here is a pure function of its arguments.

#include <algorithm>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "tsnmf/common.hpp"

namespace tsnmf {

inline constexpr double kSymmetryTolerance = 1e-12;

/// Largest |M(i,j) - M(j,i)|.
inline double asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

/// Throws unless `m` is square and symmetric to 1e-12 (relative to its largest
/// entry once that exceeds one).
inline void require_symmetric(const Matrix& m, const char* what) {
  require(m.rows() == m.cols(), std::string(what) + ": matrix is not square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (asymmetry(m) > kSymmetryTolerance * scale)
    throw DimensionError(std::string(what) + ": matrix is not symmetric");
}

inline SymMatrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Flips each column so that its first nonzero component is positive.
inline void canonicalize_signs(Matrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    for (Index i = 0; i < basis.rows(); ++i) {
      const double x = basis(i, j);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) basis.col(j) *= -1.0;
        break;
      }
    }
  }
}

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, matching `values`
};

/// Full symmetric eigendecomposition, eigenvalues ascending.
inline SymEigen sym_eig(const SymMatrix& m) {
  require_symmetric(m, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Orthonormal eigenvectors for the r algebraically smallest eigenvalues,
/// ordered ascending, with canonical signs.
inline OrthoBasis sym_eig_smallest(const SymMatrix& m, Index r) {
  require(r >= 1 && r <= m.rows(), "sym_eig_smallest: rank must lie in [1, p]");
  SymEigen eig = sym_eig(m);
  OrthoBasis basis = eig.vectors.leftCols(r);
  canonicalize_signs(basis);
  return basis;
}

/// Orthonormal eigenvectors for the r largest eigenvalues, largest first.
inline OrthoBasis sym_eig_largest(const SymMatrix& m, Index r) {
  require(r >= 1 && r <= m.rows(), "sym_eig_largest: rank must lie in [1, p]");
  SymEigen eig = sym_eig(m);
  OrthoBasis basis = eig.vectors.rightCols(r).rowwise().reverse();
  canonicalize_signs(basis);
  return basis;
}

/// M = M⁺ - M⁻ with both parts nonnegative and disjoint in support.
inline std::pair<Matrix, Matrix> posneg_split(const Matrix& m) {
  Matrix plus = m.cwiseMax(0.0);
  Matrix minus = (-m).cwiseMax(0.0);
  return {std::move(plus), std::move(minus)};
}

/// Moore-Penrose inverse of a symmetric positive semidefinite matrix.
/// Eigenvalues below 1e-12 of the largest one are treated as zero.
inline SymMatrix spd_pinverse(const SymMatrix& m) {
  require_symmetric(m, "spd_pinverse");
  if (m.size() == 0) return m;
  SymEigen eig = sym_eig(m);
  const double top = eig.values.cwiseAbs().maxCoeff();
  const double cutoff = 1e-12 * top;
  Vector inv = Vector::Zero(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) inv(i) = 1.0 / eig.values(i);
  SymMatrix result = eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
  return symmetrized(result);
}

/// ‖BᵀB - I‖_F.
inline double orthonormality_error(const Matrix& basis) {
  return (basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols())).norm();
}

/// Random p x r matrix with orthonormal columns (QR of a Gaussian matrix).
inline OrthoBasis random_orthobasis(Index rows, Index cols, Rng& rng) {
  require(cols >= 1 && cols <= rows, "random_orthobasis: need 1 <= cols <= rows");
  Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(rows, cols));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace tsnmf

#endif  // TSNMF_LINALG_HPP
