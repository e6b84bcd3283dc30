#pragma once

/**
 * @file estimation.hpp
 * @brief Polar-grid dictionary construction and greedy (OMP) path estimation
 *        from a single-subcarrier array snapshot.
 *
 * The dictionary samples (elevation, azimuth, range) on a separable grid and
 * stores one near-field steering vector per tuple. omp_estimate then runs
 * orthogonal matching pursuit: pick the atom with the largest normalized
 * correlation against the residual, least-squares refit on the selected
 * atoms, and repeat until the relative residual falls under the tolerance or
 * the path budget is exhausted.
 */

#include <cstdint>
#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/geometry.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Separable (theta, phi, r) sampling grid. An axis with one point collapses
/// to the midpoint of its range (e.g. azimuth for a linear array).
struct PolarGrid {
  RVec thetas;
  RVec phis;
  RVec rs;

  Eigen::Index size() const { return thetas.size() * phis.size() * rs.size(); }
};

/// Evenly spaced grid over closed ranges; a count of 1 yields the midpoint.
PolarGrid make_polar_grid(int m_theta, double theta_lo, double theta_hi, int m_phi,
                          double phi_lo, double phi_hi, int m_r, double r_lo,
                          double r_hi);

/// One dictionary entry's parameter tuple.
struct GridPoint {
  double theta = 0.0;
  double phi = 0.0;
  double r = 0.0;
};

/// Dense steering dictionary over a polar grid.
struct Dictionary {
  CMat atoms;                    ///< n_elements x grid size, near-field columns
  std::vector<GridPoint> points; ///< tuple behind each column
};

/**
 * @brief Materialize the steering dictionary.
 *
 * Columns are near_steering at each grid tuple, ordered theta-major, then
 * phi, then r. Throws config_error (with the would-be size) when the dense
 * matrix would exceed @p max_bytes.
 */
Dictionary build_dictionary(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                            const PolarGrid& grid,
                            std::size_t max_bytes = std::size_t(2) << 30);

/// Greedy estimation result. Tuples lie on the dictionary grid.
struct PathEstimate {
  int p_hat = 0;                   ///< number of recovered paths
  std::vector<int> support;       ///< dictionary column per path
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<double> r;
  std::vector<cxd> gains;          ///< least-squares gains on the support
  double residual_norm = 0.0;      ///< final ||y - A x|| (absolute)
};

/**
 * @brief Orthogonal matching pursuit on one array snapshot.
 *
 * @param y            observation (n_elements), typically the first-subcarrier
 *                     column of a channel sample
 * @param dict         steering dictionary
 * @param max_paths    iteration budget (>= 1)
 * @param residual_tol stop once ||residual|| / ||y|| <= residual_tol
 *
 * A zero observation returns an empty estimate. Correlation ties break toward
 * the lower column index; the relative residual is non-increasing across
 * iterations.
 */
PathEstimate omp_estimate(const CVec& y, const Dictionary& dict, int max_paths,
                          double residual_tol = 0.05);

}  // namespace wtmp
