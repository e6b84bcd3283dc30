#pragma once

/**
 * @file numerics.hpp
 * @brief Dense complex linear-algebra kernels: SVD, general eigenvalues,
 *        pseudo-inverse, unitary DFT matrix, Kronecker product.
 *
 * Thin, contract-carrying wrappers over Eigen. Everything is templated on the
 * real scalar so the same kernels run in float or double; the rest of the
 * library instantiates double. Kernels are free functions that accept any
 * Eigen expression of the right scalar (expression-friendly).
 */

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wtmp/types.hpp"

namespace wtmp {

/// Thin singular value decomposition m = U * S.asDiagonal() * Vh.
template <typename Real>
struct SvdResult {
  CMatrix<Real> U;   ///< left singular vectors, (rows x r), r = min(rows, cols)
  RVector<Real> S;   ///< singular values, descending, non-negative
  CMatrix<Real> Vh;  ///< adjoint of the right singular vectors, (r x cols)
};

/**
 * @brief Thin SVD of a dense complex matrix.
 *
 * Singular values come out non-negative in descending order and
 * U * diag(S) * Vh reconstructs the input to machine-level accuracy.
 */
template <typename Derived>
SvdResult<typename Derived::RealScalar> svd(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.rows() == 0 || m.cols() == 0) throw config_error("svd: empty matrix");
  const CMatrix<Real> a = m;
  // Jacobi is the accuracy workhorse at small sizes; BDC scales to large ones.
  if (std::min(a.rows(), a.cols()) <= 32) {
    Eigen::JacobiSVD<CMatrix<Real>> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {dec.matrixU(), dec.singularValues(), dec.matrixV().adjoint()};
  }
  Eigen::BDCSVD<CMatrix<Real>> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV().adjoint()};
}

/**
 * @brief Eigenvalues of a general (non-Hermitian) square complex matrix.
 *
 * Order is whatever the underlying Schur decomposition produces; callers sort
 * by the criterion they need (the pencil code sorts by magnitude).
 */
template <typename Derived>
CVector<typename Derived::RealScalar> eig_general(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (m.rows() == 0 || m.rows() != m.cols())
    throw config_error("eig_general: matrix must be square and non-empty");
  const CMatrix<Real> a = m;
  Eigen::ComplexEigenSolver<CMatrix<Real>> dec(a, /*computeEigenvectors=*/false);
  if (dec.info() != Eigen::Success)
    throw numerical_error("eig_general: eigenvalue iteration failed to converge");
  return dec.eigenvalues();
}

/**
 * @brief Moore-Penrose pseudo-inverse via SVD truncation.
 *
 * Singular values at or below @p tol are treated as zero. The default
 * tolerance is max(rows, cols) * eps * s_max, the standard rank cutoff.
 */
template <typename Derived>
CMatrix<typename Derived::RealScalar> pinv(const Eigen::MatrixBase<Derived>& m,
                                           typename Derived::RealScalar tol = -1) {
  using Real = typename Derived::RealScalar;
  SvdResult<Real> dec = svd(m);
  const Real smax = dec.S.size() > 0 ? dec.S(0) : Real(0);
  if (tol < Real(0))
    tol = Real(std::max(m.rows(), m.cols())) * std::numeric_limits<Real>::epsilon() * smax;
  RVector<Real> sinv = RVector<Real>::Zero(dec.S.size());
  for (Eigen::Index i = 0; i < dec.S.size(); ++i)
    if (dec.S(i) > tol && dec.S(i) > Real(0)) sinv(i) = Real(1) / dec.S(i);
  return dec.Vh.adjoint() * sinv.asDiagonal() * dec.U.adjoint();
}

/**
 * @brief Unitary DFT matrix of size n: entry(a, b) = exp(-2*pi*i*a*b/n) / sqrt(n).
 */
template <typename Real = double>
CMatrix<Real> dft_matrix(Eigen::Index n) {
  if (n <= 0) throw config_error("dft_matrix: size must be positive");
  CMatrix<Real> w(n, n);
  const Real scale = Real(1) / std::sqrt(Real(n));
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      // Reduce a*b mod n before forming the angle to keep the phase argument small.
      const Real frac = Real((a * b) % n) / Real(n);
      const Real ang = Real(-2) * Real(kPi) * frac;
      w(a, b) = Complex<Real>(std::cos(ang), std::sin(ang)) * scale;
    }
  }
  return w;
}

/**
 * @brief Kronecker product a (x) b.
 *
 * Block (i, j) of the result equals a(i, j) * b.
 */
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.derived();
  return out;
}

}  // namespace wtmp
