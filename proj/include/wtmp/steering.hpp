#pragma once

/**
 * @file steering.hpp
 * @brief Array steering vectors: planar response, spherical curvature
 *        correction, and their product (the quadratic near-field response).
 *
 * Element order matches the Kronecker convention a = a_h (x) a_v: flat index
 * k_h * n_v + k_v with 0-based k_h, k_v (see geometry.hpp for the placement).
 */

#include <cmath>

#include "wtmp/geometry.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Which distance expansion drives the element phases.
enum class WavefrontMode {
  planar,   ///< no curvature term (far-field response)
  fresnel,  ///< quadratic curvature (upsilon - psi^2) / (2r)
  exact     ///< true spherical distance
};

/**
 * @brief Planar-wavefront steering vector.
 *
 * Entry (k_h, k_v) = exp(j (2 pi / lambda) (sin(theta)sin(phi) d_h k_h
 *                                           + cos(theta) d_v k_v)).
 * Norm is sqrt(n_elements): every entry has unit modulus.
 */
template <typename Real = double>
CVector<Real> far_steering(const ArrayGeometry& geom, Real lambda, Real theta, Real phi) {
  geom.validate();
  if (lambda <= Real(0)) throw config_error("far_steering: wavelength must be positive");
  const Real wave = Real(2) * Real(kPi) / lambda;
  const Real gy = std::sin(theta) * std::sin(phi) * Real(geom.d_h);
  const Real gz = std::cos(theta) * Real(geom.d_v);
  CVector<Real> a(geom.n_elements());
  for (int kh = 0; kh < geom.n_h; ++kh) {
    for (int kv = 0; kv < geom.n_v; ++kv) {
      const Real ang = wave * (gy * Real(kh) + gz * Real(kv));
      a(element_index(geom, kh, kv)) = Complex<Real>(std::cos(ang), std::sin(ang));
    }
  }
  return a;
}

/**
 * @brief Per-element curvature correction for a source at range r.
 *
 * Fresnel mode: entry = exp(-j (2 pi / lambda) (upsilon - psi^2) / (2r)).
 * Exact mode replaces the quadratic term by the true residual
 * (exact distance) - (r - psi). Planar mode returns all ones.
 * The reference element (s_h = n_h/2, s_v = n_v/2) always gets phase 0.
 */
template <typename Real = double>
CVector<Real> distance_response(const ArrayGeometry& geom, Real lambda, Real theta,
                                Real phi, Real r,
                                WavefrontMode mode = WavefrontMode::fresnel) {
  geom.validate();
  if (lambda <= Real(0)) throw config_error("distance_response: wavelength must be positive");
  if (r <= Real(0)) throw config_error("distance_response: range must be positive");
  const Real wave = Real(2) * Real(kPi) / lambda;
  CVector<Real> a(geom.n_elements());
  for (int kh = 0; kh < geom.n_h; ++kh) {
    for (int kv = 0; kv < geom.n_v; ++kv) {
      const int sh = kh + 1, sv = kv + 1;
      Real curv = 0;
      switch (mode) {
        case WavefrontMode::planar:
          curv = 0;
          break;
        case WavefrontMode::fresnel: {
          const Real p = psi(geom, theta, phi, sh, sv);
          curv = (upsilon<Real>(geom, sh, sv) - p * p) / (Real(2) * r);
          break;
        }
        case WavefrontMode::exact:
          curv = exact_distance(geom, r, theta, phi, sh, sv) -
                 far_distance(geom, r, theta, phi, sh, sv);
          break;
      }
      const Real ang = -wave * curv;
      a(element_index(geom, kh, kv)) = Complex<Real>(std::cos(ang), std::sin(ang));
    }
  }
  return a;
}

/**
 * @brief Near-field steering vector: distance_response .* far_steering.
 */
template <typename Real = double>
CVector<Real> near_steering(const ArrayGeometry& geom, Real lambda, Real theta, Real phi,
                            Real r, WavefrontMode mode = WavefrontMode::fresnel) {
  return distance_response(geom, lambda, theta, phi, r, mode).cwiseProduct(
      far_steering(geom, lambda, theta, phi));
}

}  // namespace wtmp
