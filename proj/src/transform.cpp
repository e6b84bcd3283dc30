#include "wtmp/transform.hpp"

#include <cmath>
#include <string>

#include "wtmp/numerics.hpp"
#include "wtmp/steering.hpp"

namespace wtmp {

CVec build_u1(const ArrayGeometry& geom, const ScenarioConfig& cfg, double theta1,
              double phi1) {
  CVec a = far_steering(geom, cfg.wavelength(), theta1, phi1);
  return a / std::sqrt(double(a.size()));
}

CVec build_g_row(const CVec& u1, Eigen::Index n) {
  const Eigen::Index n_t = u1.size();
  if (n_t < 2) throw config_error("build_g_row: need at least two elements");
  if (n < 0 || n >= n_t) throw config_error("build_g_row: row index out of range");
  for (Eigen::Index q = 0; q < n_t; ++q)
    if (std::abs(u1(q)) < 1e-300)
      throw numerical_error("build_g_row: vanishing u1 entry at index " +
                            std::to_string(q));

  const double x2 = std::sqrt(double(n_t - 1) / double(n_t));
  const double s = std::sqrt(double(n_t) * double(n_t - 1));
  const Eigen::Index balance = (n == 0) ? 1 : 0;

  CVec g(n_t);
  for (Eigen::Index q = 0; q < n_t; ++q) {
    if (q == n)
      g(q) = x2;
    else
      g(q) = -std::conj(u1(n)) / (s * std::conj(u1(q)));
  }
  // Solve the balance entry from <u1, g> = 0; for unit-modulus-over-sqrt(n_t)
  // u1 this lands exactly on the closed form above.
  cxd acc(0, 0);
  for (Eigen::Index q = 0; q < n_t; ++q)
    if (q != balance) acc += std::conj(u1(q)) * g(q);
  g(balance) = -acc / std::conj(u1(balance));
  return g;
}

namespace {

/// Per-path diagonal terms: conj distance responses, dominant path weighted
/// by (1 + x_2). The transform diagonal is their average.
std::vector<CVec> per_path_terms(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                 const std::vector<double>& thetas,
                                 const std::vector<double>& phis,
                                 const std::vector<double>& rs) {
  const int P = int(thetas.size());
  const double lambda = cfg.wavelength();
  const double x2 =
      std::sqrt(double(geom.n_elements() - 1) / double(geom.n_elements()));
  std::vector<CVec> terms;
  terms.reserve(std::size_t(P));
  for (int p = 0; p < P; ++p) {
    const CVec ar = distance_response(geom, lambda, thetas[p], phis[p], rs[p]);
    terms.push_back((p == 0 ? (1.0 + x2) : 1.0) * ar.conjugate());
  }
  return terms;
}

/// Rebuild the diagonal densely: pinv of P stacked identities (computed
/// numerically and checked against the analytic (1/P)-stack) applied to the
/// stacked per-path diagonal terms. The product must come out diagonal and
/// agree with the closed form.
void verify_dense_assembly(const std::vector<CVec>& terms, const CVec& analytic) {
  const int P = int(terms.size());
  const Eigen::Index n_t = analytic.size();
  CMat stack_id = CMat::Zero(n_t * P, n_t);
  for (int p = 0; p < P; ++p) stack_id.block(p * n_t, 0, n_t, n_t).setIdentity();
  const CMat sig_pinv = pinv(stack_id);
  for (int p = 0; p < P; ++p) {
    const CMat block = sig_pinv.block(0, p * n_t, n_t, n_t);
    if ((block - CMat::Identity(n_t, n_t) / double(P)).norm() > 1e-10)
      throw numerical_error("build_transform: stacked-identity pinv check failed");
  }
  CMat stacked = CMat::Zero(n_t * P, n_t);
  for (int p = 0; p < P; ++p)
    stacked.block(p * n_t, 0, n_t, n_t) = CMat(terms[std::size_t(p)].asDiagonal());
  const CMat dense = sig_pinv * stacked;
  CMat off = dense;
  off.diagonal().setZero();
  if (off.norm() > 1e-12 * std::max(1.0, dense.norm()))
    throw numerical_error("build_transform: dense assembly is not diagonal");
  if ((dense.diagonal() - analytic).norm() > 1e-10)
    throw numerical_error("build_transform: dense diagonal mismatch");
}

}  // namespace

TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const std::vector<double>& thetas,
                                const std::vector<double>& phis,
                                const std::vector<double>& rs, int verify) {
  geom.validate();
  cfg.validate();
  const int P = int(thetas.size());
  if (P < 1) throw config_error("build_transform: need at least one path");
  if (phis.size() != size_t(P) || rs.size() != size_t(P))
    throw config_error("build_transform: path parameter lengths differ");
  for (double r : rs)
    if (r <= 0) throw config_error("build_transform: ranges must be positive");

  const std::vector<CVec> terms = per_path_terms(geom, cfg, thetas, phis, rs);
  TransformMatrix tm;
  tm.raw = CVec::Zero(geom.n_elements());
  for (const CVec& term : terms) tm.raw += term;
  tm.raw /= double(P);

  const bool do_verify = verify >= 0 ? (verify != 0)
                                     : (geom.n_elements() <= 64 && P <= 8);
  if (do_verify) verify_dense_assembly(terms, tm.raw);

  tm.bn.resize(tm.raw.size());
  for (Eigen::Index i = 0; i < tm.raw.size(); ++i) {
    const double mag = std::abs(tm.raw(i));
    if (mag < 1e-14)
      throw numerical_error(
          "build_transform: zero diagonal entry at element " + std::to_string(i) +
          "; path curvature responses cancel");
    tm.bn(i) = tm.raw(i) / mag;
  }
  return tm;
}

TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const std::vector<PathParams>& paths, int verify) {
  std::vector<double> th, ph, rr;
  for (const auto& p : paths) {
    th.push_back(p.theta);
    ph.push_back(p.phi);
    rr.push_back(p.r);
  }
  return build_transform(geom, cfg, th, ph, rr, verify);
}

TransformMatrix build_transform(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                const PathEstimate& est, int verify) {
  if (est.p_hat < 1)
    throw config_error("build_transform: estimate holds no paths");
  return build_transform(geom, cfg, est.theta, est.phi, est.r, verify);
}

TransformMatrix identity_transform(Eigen::Index n_t) {
  TransformMatrix tm;
  tm.bn = CVec::Ones(n_t);
  tm.raw = CVec::Ones(n_t);
  return tm;
}

CVec ExtendedTransform::apply_vec(const CVec& x) const {
  const Eigen::Index n_t = bn.size();
  if (x.size() != n_t * n_f)
    throw config_error("ExtendedTransform: vector length mismatch");
  CVec out(x.size());
  for (int m = 0; m < n_f; ++m)
    out.segment(m * n_t, n_t) = bn.cwiseProduct(x.segment(m * n_t, n_t));
  return out;
}

CMat ExtendedTransform::materialize() const {
  const Eigen::Index n_t = bn.size();
  CMat q = CMat::Zero(n_t * n_f, n_t * n_f);
  for (int m = 0; m < n_f; ++m)
    q.block(m * n_t, m * n_t, n_t, n_t) = CMat(bn.asDiagonal());
  return q;
}

ExtendedTransform frequency_extend(const TransformMatrix& tm, int n_f) {
  if (n_f < 1) throw config_error("frequency_extend: n_f must be >= 1");
  return {tm.bn, n_f};
}

}  // namespace wtmp
