#pragma once

/**
 * @file transform.hpp
 * @brief Wavefront transformation: a diagonal operator that rotates per-element
 *        spherical curvature out of the channel so the result looks planar to
 *        an angular (DFT) dictionary.
 *
 * Construction outline for P estimated paths (angles theta_p, phi_p, ranges
 * r_p, strongest path first):
 *  1. u_1 = far_steering(theta_1, phi_1) / sqrt(n_t), the unit planar response
 *     of the dominant path.
 *  2. Each auxiliary row g_n is a unit vector orthogonal to u_1 with
 *     g_n(n) = x_2 = sqrt((n_t - 1) / n_t) and all other entries of squared
 *     modulus 1 / (n_t (n_t - 1)): the off-diagonal mass is spread evenly.
 *  3. Combining the rows with per-path curvature responses and the
 *     pseudo-inverse of P stacked identities collapses to a diagonal:
 *        diag(B) = (1/P) [ (1 + x_2) conj(a_r(path 1))
 *                          + sum_{p >= 2} conj(a_r(path p)) ],
 *     where a_r is the distance_response of each path.
 *  4. The applied operator B_n keeps only the phase of each diagonal entry.
 *
 * For P = 1 this is exactly conj(distance_response(path 1)): the dominant
 * path is planarized with no residual. As every r_p grows, B_n tends to the
 * identity.
 */

#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/estimation.hpp"
#include "wtmp/geometry.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Unit-norm planar response of the dominant path.
CVec build_u1(const ArrayGeometry& geom, const ScenarioConfig& cfg, double theta1,
              double phi1);

/**
 * @brief Row n (0-based) of the auxiliary orthogonal row set.
 *
 * Entries: g_n(n) = sqrt((n_t-1)/n_t); every other entry has squared modulus
 * 1/(n_t (n_t-1)). All but one off-diagonal entry follow the closed form
 * -conj(u1(n)) / (s * conj(u1(q))) with s = sqrt(n_t (n_t-1)); the remaining
 * "balance" entry (index 0, or 1 when n = 0) is solved from <u1, g_n> = 0 and
 * coincides with the closed form. Throws numerical_error if any u1 entry is
 * numerically zero.
 */
CVec build_g_row(const CVec& u1, Eigen::Index n);

/// Diagonal wavefront transform. bn holds the unit-modulus applied diagonal,
/// raw the diagonal before phase normalization.
struct TransformMatrix {
  CVec bn;
  CVec raw;

  Eigen::Index n_t() const { return bn.size(); }
  /// Apply to a channel matrix (rows = elements): B_n * h.
  CMat apply(const CMat& h) const { return bn.asDiagonal() * h; }
  /// Undo: B_n is unit modulus, so the inverse diagonal is the conjugate.
  CMat unapply(const CMat& h) const { return bn.conjugate().asDiagonal() * h; }
};

/**
 * @brief Build the wavefront transform from per-path angle/range estimates.
 *
 * Paths are taken in the given order; index 0 is the dominant path. When
 * @p verify is true (default: automatically at n_t <= 64 and P <= 8) the
 * closed-form diagonal is cross-checked against the dense assembly: the
 * pseudo-inverse of the stacked identities is computed with numerics::pinv,
 * compared to the analytic (1/P)-stack, the dense product is checked to be
 * diagonal to 1e-12, and its diagonal must match the closed form.
 * Throws numerical_error on any violation or on a zero diagonal entry.
 */
TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const std::vector<double>& thetas,
                                const std::vector<double>& phis,
                                const std::vector<double>& rs, int verify = -1);

/// Convenience overloads: oracle paths or an OMP estimate.
TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const std::vector<PathParams>& paths, int verify = -1);
TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const PathEstimate& est, int verify = -1);

/// Identity transform (ablation baseline).
TransformMatrix identity_transform(Eigen::Index n_t);

/**
 * @brief The transform extended across subcarriers.
 *
 * Acting on vec(H) (element index fastest) the operator is
 * I_{n_f} (x) diag(bn); this type applies it blockwise without materializing
 * the Kronecker product. The inverse is the conjugate diagonal.
 */
struct ExtendedTransform {
  CVec bn;
  int n_f = 1;

  CVec apply_vec(const CVec& x) const;
  ExtendedTransform inverse() const { return {bn.conjugate(), n_f}; }
  /// Dense Kronecker form for small-size verification.
  CMat materialize() const;
};

ExtendedTransform frequency_extend(const TransformMatrix& tm, int n_f);

}  // namespace wtmp
