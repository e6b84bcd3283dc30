#pragma once

/**
 * @file geometry.hpp
 * @brief Planar-array geometry: element positions, propagation distances under
 *        successive wavefront approximations, and the validity region of the
 *        quadratic (Fresnel) model.
 *
 * Conventions:
 *  - The array lies in the y-z plane. Column index s_h runs along y with pitch
 *    d_h, row index s_v along z with pitch d_v; both are 1-based.
 *  - Element (s_h, s_v) sits at (0, d_h*(s_h - n_h/2), d_v*(s_v - n_v/2)), so
 *    the element (n_h/2, n_v/2) is the phase reference at the origin.
 *  - theta is the elevation angle measured from the +z axis, phi the azimuth
 *    in the x-y plane from the +x axis. A scatterer at range r sits at
 *    r * [sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)].
 */

#include <cmath>
#include <utility>

#include "wtmp/types.hpp"

namespace wtmp {

/// Uniform planar array: counts and pitches per axis. A count of 1 degenerates
/// that axis (uniform linear array); otherwise counts must be even so the
/// reference element lands on the grid.
struct ArrayGeometry {
  int n_h = 1;       ///< number of columns (y axis)
  int n_v = 1;       ///< number of rows (z axis)
  double d_h = 0.0;  ///< column pitch in meters
  double d_v = 0.0;  ///< row pitch in meters

  int n_elements() const { return n_h * n_v; }
  /// Aperture extent per axis (count * pitch), used by the region bounds.
  double aperture_h() const { return n_h * d_h; }
  double aperture_v() const { return n_v * d_v; }

  void validate() const {
    if (n_h < 1 || n_v < 1) throw config_error("ArrayGeometry: counts must be >= 1");
    if ((n_h > 1 && n_h % 2 != 0) || (n_v > 1 && n_v % 2 != 0))
      throw config_error("ArrayGeometry: counts must be even (or 1 for a degenerate axis)");
    if (d_h <= 0.0 || d_v <= 0.0) throw config_error("ArrayGeometry: pitches must be positive");
  }
};

/// Flat element index for (k_h, k_v) with 0-based k: columns major, rows minor.
inline Eigen::Index element_index(const ArrayGeometry& geom, int k_h, int k_v) {
  return static_cast<Eigen::Index>(k_h) * geom.n_v + k_v;
}

/// Unit vector from the array origin toward direction (theta, phi).
template <typename Real = double>
Eigen::Matrix<Real, 3, 1> rx_unit_vector(Real theta, Real phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

/// Position of element (s_h, s_v), 1-based indices.
template <typename Real = double>
Eigen::Matrix<Real, 3, 1> element_position(const ArrayGeometry& geom, int s_h, int s_v) {
  if (s_h < 1 || s_h > geom.n_h || s_v < 1 || s_v > geom.n_v)
    throw config_error("element_position: index out of range");
  return {Real(0), Real(geom.d_h) * (Real(s_h) - Real(geom.n_h) / Real(2)),
          Real(geom.d_v) * (Real(s_v) - Real(geom.n_v) / Real(2))};
}

/// Projection of the element offset onto the arrival direction:
/// psi = sin(theta)sin(phi) d_h (s_h - n_h/2) + cos(theta) d_v (s_v - n_v/2).
template <typename Real = double>
Real psi(const ArrayGeometry& geom, Real theta, Real phi, int s_h, int s_v) {
  const Real oy = Real(geom.d_h) * (Real(s_h) - Real(geom.n_h) / Real(2));
  const Real oz = Real(geom.d_v) * (Real(s_v) - Real(geom.n_v) / Real(2));
  return std::sin(theta) * std::sin(phi) * oy + std::cos(theta) * oz;
}

/// Squared element offset: upsilon = d_h^2 (s_h - n_h/2)^2 + d_v^2 (s_v - n_v/2)^2.
template <typename Real = double>
Real upsilon(const ArrayGeometry& geom, int s_h, int s_v) {
  const Real oy = Real(geom.d_h) * (Real(s_h) - Real(geom.n_h) / Real(2));
  const Real oz = Real(geom.d_v) * (Real(s_v) - Real(geom.n_v) / Real(2));
  return oy * oy + oz * oz;
}

/// True whenever the scatterer range is large enough for the distance
/// expansions to be meaningful; callers surface a warning when this is false.
inline bool distance_in_model_range(const ArrayGeometry& geom, double r) {
  return r > std::max(geom.aperture_h(), geom.aperture_v());
}

/// Exact scatterer-to-element distance r * sqrt(1 - 2 psi / r + upsilon / r^2).
template <typename Real = double>
Real exact_distance(const ArrayGeometry& geom, Real r, Real theta, Real phi, int s_h,
                    int s_v) {
  const Real p = psi(geom, theta, phi, s_h, s_v);
  const Real u = upsilon(geom, s_h, s_v);
  return r * std::sqrt(Real(1) - Real(2) * p / r + u / (r * r));
}

/// Quadratic (Fresnel) distance: r - psi + (upsilon - psi^2) / (2r).
template <typename Real = double>
Real fresnel_distance(const ArrayGeometry& geom, Real r, Real theta, Real phi, int s_h,
                      int s_v) {
  const Real p = psi(geom, theta, phi, s_h, s_v);
  const Real u = upsilon(geom, s_h, s_v);
  return r - p + (u - p * p) / (Real(2) * r);
}

/// Planar (far-field) distance: r - psi.
template <typename Real = double>
Real far_distance(const ArrayGeometry& geom, Real r, Real theta, Real phi, int s_h,
                  int s_v) {
  return r - psi(geom, theta, phi, s_h, s_v);
}

/// Cubic refinement: Fresnel + (psi*upsilon - psi^3) / (2 r^2).
template <typename Real = double>
Real third_order_distance(const ArrayGeometry& geom, Real r, Real theta, Real phi,
                          int s_h, int s_v) {
  const Real p = psi(geom, theta, phi, s_h, s_v);
  const Real u = upsilon(geom, s_h, s_v);
  return fresnel_distance(geom, r, theta, phi, s_h, s_v) +
         (p * u - p * p * p) / (Real(2) * r * r);
}

/// Worst-case phase error of the Fresnel model against the cubic term:
/// (2 pi / lambda) |psi*upsilon - psi^3| / (2 r^2).
template <typename Real = double>
Real near_field_phase_discrepancy(const ArrayGeometry& geom, Real lambda, Real r,
                                  Real theta, Real phi, int s_h, int s_v) {
  const Real p = psi(geom, theta, phi, s_h, s_v);
  const Real u = upsilon(geom, s_h, s_v);
  return Real(2) * Real(kPi) / lambda * std::abs(p * u - p * p * p) /
         (Real(2) * r * r);
}

/// Phase error of the planar model against the quadratic term:
/// (2 pi / lambda) |upsilon - psi^2| / (2 r).
template <typename Real = double>
Real far_field_phase_discrepancy(const ArrayGeometry& geom, Real lambda, Real r,
                                 Real theta, Real phi, int s_h, int s_v) {
  const Real p = psi(geom, theta, phi, s_h, s_v);
  const Real u = upsilon(geom, s_h, s_v);
  return Real(2) * Real(kPi) / lambda * std::abs(u - p * p) / (Real(2) * r);
}

/// Direction-dependent cubic-error factor
/// xi(theta) = (sin(theta) D_h + cos(theta) D_v) (cos(theta) D_h - sin(theta) D_v)^2.
template <typename Real = double>
Real xi_factor(Real theta, Real aperture_h, Real aperture_v) {
  const Real s = std::sin(theta), c = std::cos(theta);
  const Real first = s * aperture_h + c * aperture_v;
  const Real second = c * aperture_h - s * aperture_v;
  return first * second * second;
}

/// Range band where the quadratic model is the right tool:
/// lower edge sqrt(max_theta xi(theta) / lambda), upper edge 2 (D_h^2 + D_v^2) / lambda.
/// For tiny apertures the band collapses (lo >= hi); callers decide what that means.
struct ApproximationRegion {
  double lo = 0.0;
  double hi = 0.0;
};

template <typename Real = double>
ApproximationRegion approximation_region(const ArrayGeometry& geom, Real lambda) {
  if (lambda <= Real(0)) throw config_error("approximation_region: wavelength must be positive");
  const Real dh = Real(geom.aperture_h());
  const Real dv = Real(geom.aperture_v());
  const Real hi = Real(2) * (dh * dh + dv * dv) / lambda;

  // Dense scan of xi over [0, pi] (step <= 1e-4 rad), then a local ternary
  // refinement inside the best bracket.
  const Real step = Real(1e-4);
  const int n_steps = static_cast<int>(std::ceil(Real(kPi) / step));
  Real best_theta = 0, best_xi = xi_factor<Real>(0, dh, dv);
  for (int i = 1; i <= n_steps; ++i) {
    const Real th = Real(kPi) * Real(i) / Real(n_steps);
    const Real x = xi_factor(th, dh, dv);
    if (x > best_xi) {
      best_xi = x;
      best_theta = th;
    }
  }
  Real a = std::max(Real(0), best_theta - Real(kPi) / Real(n_steps));
  Real b = std::min(Real(kPi), best_theta + Real(kPi) / Real(n_steps));
  for (int it = 0; it < 200; ++it) {
    const Real m1 = a + (b - a) / Real(3);
    const Real m2 = b - (b - a) / Real(3);
    if (xi_factor(m1, dh, dv) < xi_factor(m2, dh, dv))
      a = m1;
    else
      b = m2;
  }
  const Real theta_star = (a + b) / Real(2);
  const Real xi_max = std::max(best_xi, xi_factor(theta_star, dh, dv));
  const Real lo = xi_max > Real(0) ? std::sqrt(xi_max / lambda) : Real(0);
  return {double(lo), double(hi)};
}

}  // namespace wtmp
