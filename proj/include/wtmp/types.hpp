#pragma once

/**
 * @file types.hpp
 * @brief Common scalar/matrix aliases and the error taxonomy used across the library.
 *
 * All dense linear algebra is carried by Eigen. Complex matrices default to
 * double precision; the numerics kernels in numerics.hpp are templated on the
 * real scalar and these aliases are their double instantiations.
 */

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wtmp {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cxd = Complex<double>;
using CMat = CMatrix<double>;
using CVec = CVector<double>;
using RMat = RMatrix<double>;
using RVec = RVector<double>;
using Vec3 = Eigen::Vector3d;

/// Speed of light in m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Invalid or inconsistent configuration (CLI exit code 2).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: rank collapse, non-convergence, broken invariant (CLI exit code 3).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// File or serialization failure (CLI exit code 4).
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wtmp
