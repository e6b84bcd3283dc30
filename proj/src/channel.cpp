#include "wtmp/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wtmp {

CVec delay_doppler_vector(const ScenarioConfig& cfg, double tau0, double omega_hz,
                          double t) {
  cfg.validate();
  CVec b(cfg.n_f);
  for (int m = 0; m < cfg.n_f; ++m) {
    const double fm = cfg.subcarrier_hz(m);
    const double ang = 2.0 * kPi * ((1.0 + fm / cfg.f_c_hz) * omega_hz * t - fm * tau0);
    b(m) = std::polar(1.0, ang);
  }
  return b;
}

ChannelSnapshot synthesize_channel(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                   const std::vector<PathParams>& paths, double t,
                                   int port, WavefrontMode mode) {
  geom.validate();
  cfg.validate();
  ChannelSnapshot out;
  out.t = t;
  out.h = CMat::Zero(geom.n_elements(), cfg.n_f);
  const double lambda = cfg.wavelength();
  for (const PathParams& p : paths) {
    if (port < 0 || port >= static_cast<int>(p.gains.size()))
      throw config_error("synthesize_channel: port index out of range for path gains");
    if (!distance_in_model_range(geom, p.r)) out.range_warning = true;
    const CVec a = near_steering(geom, lambda, p.theta, p.phi, p.r, mode);
    const CVec b = delay_doppler_vector(cfg, p.tau0, p.omega_hz, t);
    out.h.noalias() += p.gains[port] * a * b.transpose();
  }
  return out;
}

ChannelSnapshot observe(const ChannelSnapshot& snapshot, double snr_db, uint64_t seed) {
  ChannelSnapshot out = snapshot;
  const Eigen::Index n = snapshot.h.size();
  if (n == 0) return out;
  const double mean_power = snapshot.h.squaredNorm() / double(n);
  const double noise_var = mean_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_var / 2.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index j = 0; j < out.h.cols(); ++j)
    for (Eigen::Index i = 0; i < out.h.rows(); ++i)
      out.h(i, j) += cxd(sigma * g(rng), sigma * g(rng));
  return out;
}

std::vector<PathParams> generate_scenario(const ScenarioConfig& cfg,
                                          const ScenarioGenParams& params,
                                          uint64_t seed) {
  cfg.validate();
  if (params.n_clusters < 1 || params.rays_per_cluster < 1)
    throw config_error("generate_scenario: cluster counts must be >= 1");
  if (!(params.r_min > 0) || params.r_max < params.r_min)
    throw config_error("generate_scenario: invalid range band");
  if (params.n_ports < 1) throw config_error("generate_scenario: n_ports must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double lambda = cfg.wavelength();
  const double heading = 2.0 * kPi * u01(rng) - kPi;
  const Vec3 velocity = params.speed_mps * Vec3(std::cos(heading), std::sin(heading), 0.0);

  auto clamp_elevation = [](double th) {
    return std::clamp(th, 1e-3, kPi - 1e-3);
  };

  std::vector<PathParams> paths;
  paths.reserve(size_t(params.n_clusters) * params.rays_per_cluster);
  for (int c = 0; c < params.n_clusters; ++c) {
    const double eod0 = kPi * (0.25 + 0.5 * u01(rng));
    const double aod0 = 0.45 * kPi * (2.0 * u01(rng) - 1.0);
    const double eoa0 = kPi * (0.25 + 0.5 * u01(rng));
    const double aoa0 = 0.45 * kPi * (2.0 * u01(rng) - 1.0);
    for (int k = 0; k < params.rays_per_cluster; ++k) {
      PathParams p;
      p.theta = clamp_elevation(eod0 + params.spreads.eod * gauss(rng));
      p.phi = aod0 + params.spreads.aod * gauss(rng);
      const double eoa = clamp_elevation(eoa0 + params.spreads.eoa * gauss(rng));
      const double aoa = aoa0 + params.spreads.aoa * gauss(rng);
      p.r = params.r_min + (params.r_max - params.r_min) * u01(rng);
      p.tau0 = p.r / kSpeedOfLight;
      p.omega_hz = velocity.dot(rx_unit_vector(eoa, aoa)) / lambda;
      p.gains.resize(params.n_ports);
      for (int q = 0; q < params.n_ports; ++q) p.gains[q] = cxd(gauss(rng), gauss(rng));
      paths.push_back(std::move(p));
    }
  }

  // Normalize so each port carries unit total path power.
  for (int q = 0; q < params.n_ports; ++q) {
    double power = 0.0;
    for (const PathParams& p : paths) power += std::norm(p.gains[q]);
    const double scale = power > 0 ? 1.0 / std::sqrt(power) : 1.0;
    for (PathParams& p : paths) p.gains[q] *= scale;
  }
  return paths;
}

}  // namespace wtmp
