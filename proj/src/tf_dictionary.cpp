#include "wtmp/tf_dictionary.hpp"

#include <cmath>

#include "wtmp/numerics.hpp"

namespace wtmp {

double delay_interval(const ScenarioConfig& cfg) {
  cfg.validate();
  return 1.0 / (double(cfg.n_f) * cfg.delta_f_hz);
}

double doppler_interval(const ScenarioConfig& cfg) {
  cfg.validate();
  return cfg.f_c_hz / (double(cfg.n_s) * cfg.t_slot_s * (cfg.f_c_hz + cfg.f1_hz()));
}

double doppler_interval_exact(const ScenarioConfig& cfg, int m) {
  cfg.validate();
  if (m < 0 || m >= cfg.n_f)
    throw config_error("doppler_interval_exact: subcarrier index out of range");
  return cfg.f_c_hz /
         (double(cfg.n_s) * cfg.t_slot_s * (cfg.f_c_hz + cfg.subcarrier_hz(m)));
}

double delay_coherence(const ScenarioConfig& cfg, double dtau) {
  cfg.validate();
  const double num = std::sin(kPi * cfg.delta_f_hz * cfg.n_f * dtau);
  const double den = std::sin(kPi * cfg.delta_f_hz * dtau);
  // den -> 0 only at full-period offsets, where num -> 0 too and the
  // ratio's limit is 1 (parallel atoms).
  if (std::abs(den) < 1e-9) return 1.0;
  return std::abs(num / (cfg.n_f * den));
}

double doppler_coherence(const ScenarioConfig& cfg, double domega, int m) {
  cfg.validate();
  if (m < 0 || m >= cfg.n_f)
    throw config_error("doppler_coherence: subcarrier index out of range");
  const double x = domega * (1.0 + cfg.subcarrier_hz(m) / cfg.f_c_hz) * cfg.t_slot_s;
  const double num = std::sin(kPi * x * cfg.n_s);
  const double den = std::sin(kPi * x);
  if (std::abs(den) < 1e-9) return 1.0;  // integer x: parallel tones
  return std::abs(num / (cfg.n_s * den));
}

CMat build_block(const ScenarioConfig& cfg, int doppler_bin, int time_index) {
  cfg.validate();
  if (doppler_bin < 1 || doppler_bin > cfg.n_s)
    throw config_error("build_block: doppler_bin must be in [1, n_s]");
  if (time_index < 1) throw config_error("build_block: time_index must be >= 1");

  const int nf = cfg.n_f;
  const double scale = 1.0 / std::sqrt(double(nf));
  const double dw = doppler_interval(cfg);
  const double t = double(time_index) * cfg.t_slot_s;
  CMat w(nf, nf);
  for (int m = 0; m < nf; ++m) {
    const double doppler_phase = 2.0 * kPi * (1.0 + cfg.subcarrier_hz(m) / cfg.f_c_hz) *
                                 double(doppler_bin - 1) * dw * t;
    for (int kd = 0; kd < nf; ++kd) {
      // Reduced product keeps the static bin bitwise equal to dft_matrix.
      const double delay_phase = 2.0 * kPi * double((m * kd) % nf) / double(nf);
      w(m, kd) = scale * std::polar(1.0, doppler_phase - delay_phase);
    }
  }
  return w;
}

TfDictionary::TfDictionary(const ScenarioConfig& cfg, bool static_time)
    : cfg_(cfg), static_time_(static_time) {
  cfg_.validate();
  dtau_ = delay_interval(cfg_);
  domega_ = doppler_interval(cfg_);
}

Eigen::Index TfDictionary::coeff_size() const {
  return Eigen::Index(cfg_.n_f) * cfg_.n_s * cfg_.n_s;
}

Eigen::Index TfDictionary::section_size() const {
  return Eigen::Index(cfg_.n_f) * cfg_.n_s;
}

const CMat& TfDictionary::block(int doppler_bin, int time_index) const {
  if (static_time_) time_index = 1;
  const auto key = std::make_pair(doppler_bin, time_index);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  CMat w = build_block(cfg_, doppler_bin, time_index);
  return cache_.emplace(key, std::move(w)).first->second;
}

void TfDictionary::set_materialize_cap(std::size_t max_entries) {
  std::lock_guard<std::mutex> lock(mu_);
  cap_ = max_entries;
  dense_built_ = false;
  dense_.resize(0, 0);
}

const CMat* TfDictionary::materialized() const {
  std::lock_guard<std::mutex> lock(mu_);
  const std::size_t entries = std::size_t(cfg_.n_f) * std::size_t(coeff_size());
  if (entries > cap_) return nullptr;
  if (!dense_built_) {
    dense_.resize(cfg_.n_f, coeff_size());
    for (int nt = 1; nt <= cfg_.n_s; ++nt)
      for (int ns = 1; ns <= cfg_.n_s; ++ns)
        dense_.middleCols(Eigen::Index(((nt - 1) * cfg_.n_s + (ns - 1))) * cfg_.n_f,
                          cfg_.n_f) = build_block(cfg_, ns, nt);
    dense_built_ = true;
  }
  return &dense_;
}

CVec project_tf(const CVec& x, const TfDictionary& dict, int time_index,
                TfPinv kind) {
  const auto& cfg = dict.config();
  if (x.size() != cfg.n_f)
    throw config_error("project_tf: sample length must equal n_f");
  if (time_index < 1 || time_index > cfg.n_s)
    throw config_error("project_tf: time_index must be in [1, n_s]");

  if (kind == TfPinv::svd) {
    const CMat* dense = dict.materialized();
    if (!dense)
      throw config_error("project_tf: svd path requires a materializable dictionary");
    return pinv(*dense) * x;
  }

  const double inv_ns2 = 1.0 / (double(cfg.n_s) * double(cfg.n_s));
  if (const CMat* dense = dict.materialized())
    return dense->adjoint() * x * inv_ns2;

  CVec coeffs(dict.coeff_size());
  for (int nt = 1; nt <= cfg.n_s; ++nt)
    for (int ns = 1; ns <= cfg.n_s; ++ns)
      coeffs.segment(Eigen::Index(((nt - 1) * cfg.n_s + (ns - 1))) * cfg.n_f,
                     cfg.n_f) = dict.block(ns, nt).adjoint() * x * inv_ns2;
  return coeffs;
}

CVec reconstruct_tf(const CVec& coeffs, const TfDictionary& dict, int time_index) {
  const auto& cfg = dict.config();
  if (coeffs.size() != dict.coeff_size())
    throw config_error("reconstruct_tf: coefficient length must be n_f * n_s^2");
  if (time_index < 1 || time_index > cfg.n_s)
    throw config_error("reconstruct_tf: time_index must be in [1, n_s]");

  CVec x = CVec::Zero(cfg.n_f);
  const Eigen::Index section = Eigen::Index(time_index - 1) * dict.section_size();
  for (int ns = 1; ns <= cfg.n_s; ++ns)
    x += dict.block(ns, time_index) *
         coeffs.segment(section + Eigen::Index(ns - 1) * cfg.n_f, cfg.n_f);
  return double(cfg.n_s) * x;
}

CMat materialize_dictionary(const TfDictionary& dict) {
  const auto& cfg = dict.config();
  CMat dense(cfg.n_f, dict.coeff_size());
  for (int nt = 1; nt <= cfg.n_s; ++nt)
    for (int ns = 1; ns <= cfg.n_s; ++ns)
      dense.middleCols(Eigen::Index(((nt - 1) * cfg.n_s + (ns - 1))) * cfg.n_f,
                       cfg.n_f) = dict.block(ns, nt);
  return dense;
}

}  // namespace wtmp
