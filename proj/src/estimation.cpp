#include "wtmp/estimation.hpp"

#include <algorithm>
#include <string>

#include "wtmp/steering.hpp"

namespace wtmp {

namespace {

RVec linspace_or_mid(int n, double lo, double hi) {
  if (n < 1) throw config_error("make_polar_grid: axis counts must be >= 1");
  if (hi < lo) throw config_error("make_polar_grid: empty axis range");
  RVec v(n);
  if (n == 1) {
    v(0) = 0.5 * (lo + hi);
    return v;
  }
  for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

}  // namespace

PolarGrid make_polar_grid(int m_theta, double theta_lo, double theta_hi, int m_phi,
                          double phi_lo, double phi_hi, int m_r, double r_lo,
                          double r_hi) {
  if (r_lo <= 0) throw config_error("make_polar_grid: ranges must be positive");
  PolarGrid grid;
  grid.thetas = linspace_or_mid(m_theta, theta_lo, theta_hi);
  grid.phis = linspace_or_mid(m_phi, phi_lo, phi_hi);
  grid.rs = linspace_or_mid(m_r, r_lo, r_hi);
  return grid;
}

Dictionary build_dictionary(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                            const PolarGrid& grid, std::size_t max_bytes) {
  geom.validate();
  cfg.validate();
  if (grid.size() == 0) throw config_error("build_dictionary: empty grid");
  const std::size_t bytes =
      std::size_t(grid.size()) * std::size_t(geom.n_elements()) * sizeof(cxd);
  if (bytes > max_bytes)
    throw config_error("build_dictionary: dictionary would need " +
                       std::to_string(bytes) + " bytes, cap is " +
                       std::to_string(max_bytes));

  Dictionary dict;
  dict.atoms.resize(geom.n_elements(), grid.size());
  dict.points.reserve(std::size_t(grid.size()));
  const double lambda = cfg.wavelength();
  Eigen::Index col = 0;
  for (Eigen::Index it = 0; it < grid.thetas.size(); ++it) {
    for (Eigen::Index ip = 0; ip < grid.phis.size(); ++ip) {
      for (Eigen::Index ir = 0; ir < grid.rs.size(); ++ir, ++col) {
        const GridPoint pt{grid.thetas(it), grid.phis(ip), grid.rs(ir)};
        dict.atoms.col(col) = near_steering(geom, lambda, pt.theta, pt.phi, pt.r);
        dict.points.push_back(pt);
      }
    }
  }
  return dict;
}

PathEstimate omp_estimate(const CVec& y, const Dictionary& dict, int max_paths,
                          double residual_tol) {
  if (dict.atoms.cols() == 0 || dict.atoms.rows() != y.size())
    throw config_error("omp_estimate: dictionary/observation shape mismatch");
  if (max_paths < 1) throw config_error("omp_estimate: max_paths must be >= 1");

  PathEstimate est;
  const double y_norm = y.norm();
  if (y_norm == 0.0) return est;

  const Eigen::Index n_atoms = dict.atoms.cols();
  RVec atom_norms(n_atoms);
  for (Eigen::Index j = 0; j < n_atoms; ++j) atom_norms(j) = dict.atoms.col(j).norm();

  CVec residual = y;
  std::vector<char> used(std::size_t(n_atoms), 0);
  CVec gains;
  while (est.p_hat < max_paths && residual.norm() / y_norm > residual_tol) {
    // Largest normalized correlation, ties to the lower index.
    CVec corr = dict.atoms.adjoint() * residual;
    Eigen::Index best = -1;
    double best_val = 0.0;
    for (Eigen::Index j = 0; j < n_atoms; ++j) {
      if (used[std::size_t(j)]) continue;
      const double v = std::abs(corr(j)) / atom_norms(j);
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    if (best < 0 || best_val <= 1e-14 * y_norm) break;  // residual orthogonal to grid

    used[std::size_t(best)] = 1;
    est.support.push_back(int(best));
    est.p_hat = int(est.support.size());

    CMat sub(y.size(), est.p_hat);
    for (int k = 0; k < est.p_hat; ++k) sub.col(k) = dict.atoms.col(est.support[k]);
    gains = sub.colPivHouseholderQr().solve(y);
    residual = y - sub * gains;
  }

  est.residual_norm = residual.norm();
  est.theta.reserve(est.support.size());
  for (std::size_t k = 0; k < est.support.size(); ++k) {
    const GridPoint& pt = dict.points[std::size_t(est.support[k])];
    est.theta.push_back(pt.theta);
    est.phi.push_back(pt.phi);
    est.r.push_back(pt.r);
    est.gains.push_back(gains(Eigen::Index(k)));
  }
  return est;
}

}  // namespace wtmp
