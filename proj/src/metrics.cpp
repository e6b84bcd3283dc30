#include "wtmp/metrics.hpp"

#include <cmath>
#include <iostream>
#include <limits>

#include "wtmp/numerics.hpp"

namespace wtmp {

double prediction_error_db(const std::vector<CMat>& h_hat,
                           const std::vector<CMat>& h_true) {
  if (h_hat.empty() || h_hat.size() != h_true.size())
    throw config_error("prediction_error_db: need equally many non-empty pairs");
  double acc = 0.0;
  for (std::size_t i = 0; i < h_hat.size(); ++i) {
    if (h_hat[i].rows() != h_true[i].rows() || h_hat[i].cols() != h_true[i].cols())
      throw config_error("prediction_error_db: shape mismatch at pair " +
                         std::to_string(i));
    const double ref = h_true[i].squaredNorm();
    if (ref <= 0.0)
      throw config_error("prediction_error_db: zero reference channel at pair " +
                         std::to_string(i));
    acc += (h_hat[i] - h_true[i]).squaredNorm() / ref;
  }
  const double mean = acc / double(h_hat.size());
  const double floor_ratio = std::pow(10.0, kPredictionErrorFloorDb / 10.0);
  if (mean <= floor_ratio) return kPredictionErrorFloorDb;
  return 10.0 * std::log10(mean);
}

double prediction_error_db(const CMat& h_hat, const CMat& h_true) {
  return prediction_error_db(std::vector<CMat>{h_hat},
                             std::vector<CMat>{h_true});
}

TransformNmse transform_nmse(const CMat& h, const TransformMatrix& bn,
                             const CMat& h_plane) {
  if (h.rows() != h_plane.rows() || h.cols() != h_plane.cols())
    throw config_error("transform_nmse: channel/reference shape mismatch");
  if (bn.n_t() != h.rows())
    throw config_error("transform_nmse: transform size does not match channel");
  const double ref = h_plane.squaredNorm();
  if (ref <= 0.0) throw config_error("transform_nmse: zero planar reference");
  TransformNmse out;
  out.with_bn = (bn.apply(h) - h_plane).squaredNorm() / ref;
  out.without_bn = (h - h_plane).squaredNorm() / ref;
  return out;
}

TransformNmse transform_nmse(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                             const std::vector<PathParams>& paths,
                             const TransformMatrix& bn, WavefrontMode mode,
                             double t) {
  if (paths.empty()) throw config_error("transform_nmse: no paths");
  const std::size_t n_ports = paths.front().gains.size();
  TransformNmse acc;
  for (std::size_t port = 0; port < n_ports; ++port) {
    const ChannelSnapshot h = synthesize_channel(geom, cfg, paths, t, int(port), mode);
    const ChannelSnapshot h_plane =
        synthesize_channel(geom, cfg, paths, t, int(port), WavefrontMode::planar);
    const TransformNmse one = transform_nmse(h.h, bn, h_plane.h);
    acc.with_bn += one.with_bn;
    acc.without_bn += one.without_bn;
  }
  acc.with_bn /= double(n_ports);
  acc.without_bn /= double(n_ports);
  return acc;
}

CVec effective_row(const CMat& ue_channel) {
  if (ue_channel.rows() < 1 || ue_channel.cols() < 1)
    throw config_error("effective_row: empty channel");
  Eigen::JacobiSVD<CMat> svd(ue_channel, Eigen::ComputeThinU);
  const CVec u1 = svd.matrixU().col(0);
  return (u1.adjoint() * ue_channel).transpose();
}

EzfPrecoder ezf_precode(const std::vector<CMat>& ue_channels) {
  const Eigen::Index n_ue = Eigen::Index(ue_channels.size());
  if (n_ue < 1) throw config_error("ezf_precode: no UE channels");
  const Eigen::Index n_t = ue_channels.front().cols();

  EzfPrecoder out;
  out.h_eff.resize(n_ue, n_t);
  for (Eigen::Index u = 0; u < n_ue; ++u) {
    if (ue_channels[u].cols() != n_t)
      throw config_error("ezf_precode: inconsistent antenna count across UEs");
    out.h_eff.row(u) = effective_row(ue_channels[u]).transpose();
  }

  // Gram inverse with a conditioning check; rank deficiency (e.g. duplicated
  // effective rows) switches to a trace-scaled ridge so the solve stays
  // finite, at the cost of the exact zero-forcing property.
  const CMat gram = out.h_eff * out.h_eff.adjoint();
  Eigen::JacobiSVD<CMat> svd(gram);
  const auto& sv = svd.singularValues();
  const double tol =
      double(n_ue) * std::numeric_limits<double>::epsilon() * sv(0);
  CMat gram_reg = gram;
  if (sv(sv.size() - 1) <= tol) {
    out.regularized = true;
    const double ridge =
        std::max(1e-12 * gram.trace().real() / double(n_ue), 1e-300);
    gram_reg += ridge * CMat::Identity(n_ue, n_ue);
    std::cerr << "ezf_precode: rank-deficient effective channel, "
                 "regularizing the inverse\n";
  }
  out.w = out.h_eff.adjoint() * gram_reg.inverse();
  for (Eigen::Index u = 0; u < n_ue; ++u) {
    const double nrm = out.w.col(u).norm();
    if (nrm <= 0.0)
      throw numerical_error("ezf_precode: zero precoder column " + std::to_string(u));
    out.w.col(u) /= nrm;
  }
  return out;
}

double spectral_efficiency(const std::vector<CMat>& true_ue_channels, const CMat& w,
                           double snr_db) {
  const Eigen::Index n_ue = Eigen::Index(true_ue_channels.size());
  if (n_ue < 1) throw config_error("spectral_efficiency: no UE channels");
  if (w.cols() != n_ue)
    throw config_error("spectral_efficiency: precoder column count != UE count");
  const double rho = std::pow(10.0, snr_db / 10.0);

  double se = 0.0;
  for (Eigen::Index u = 0; u < n_ue; ++u) {
    if (true_ue_channels[u].cols() != w.rows())
      throw config_error("spectral_efficiency: channel/precoder size mismatch");
    const CVec h_u = effective_row(true_ue_channels[u]);
    const double sig = std::norm((h_u.transpose() * w.col(u))(0, 0));
    double interf = 0.0;
    for (Eigen::Index v = 0; v < n_ue; ++v)
      if (v != u) interf += std::norm((h_u.transpose() * w.col(v))(0, 0));
    se += std::log2(1.0 + rho * sig / (1.0 + rho * interf));
  }
  return se;
}

}  // namespace wtmp
