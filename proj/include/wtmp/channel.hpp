#pragma once

/**
 * @file channel.hpp
 * @brief Multipath time-varying channel synthesis over an OFDM grid.
 *
 * The channel between the array and one UE port at slot time t is
 *   H(t) = sum_p c_p * a(theta_p, phi_p, r_p) * b(tau_p, omega_p, t)^T,
 * an n_elements x n_subcarriers matrix. a is the near-field steering vector
 * (steering.hpp), b the delay-Doppler response across subcarriers:
 *   b_m(t) = exp(j 2 pi ((1 + f_m / f_c) omega t - f_m tau_0)),
 * with f_m the absolute subcarrier frequency. This is the time-varying delay
 * model tau(t) = tau_0 - omega t / f_c folded into a single phase.
 */

#include <cstdint>
#include <vector>

#include "wtmp/geometry.hpp"
#include "wtmp/steering.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// OFDM grid and sampling layout shared across the pipeline.
struct ScenarioConfig {
  double f_c_hz = 39e9;     ///< carrier frequency
  double delta_f_hz = 30e3; ///< subcarrier spacing
  int n_f = 12;             ///< number of subcarriers
  double t_slot_s = 0.5e-3; ///< channel sampling period (one slot)
  int n_s = 25;             ///< number of observed samples per record
  /// Offset of the first subcarrier from the carrier; the default centers the
  /// band on the carrier: f_1 = f_c - n_f * delta_f / 2.
  double f1_offset_hz = std::numeric_limits<double>::quiet_NaN();

  double wavelength() const { return kSpeedOfLight / f_c_hz; }
  double bandwidth() const { return n_f * delta_f_hz; }
  double f1_hz() const {
    return f_c_hz + (std::isnan(f1_offset_hz) ? -bandwidth() / 2 : f1_offset_hz);
  }
  /// Absolute frequency of subcarrier m (0-based).
  double subcarrier_hz(int m) const { return f1_hz() + m * delta_f_hz; }

  void validate() const {
    if (f_c_hz <= 0 || delta_f_hz <= 0 || t_slot_s <= 0)
      throw config_error("ScenarioConfig: frequencies and slot duration must be positive");
    if (n_f < 1 || n_s < 1) throw config_error("ScenarioConfig: n_f and n_s must be >= 1");
    if (f1_hz() <= 0) throw config_error("ScenarioConfig: first subcarrier must be positive");
  }
};

/// One propagation path.
struct PathParams {
  double theta = 0.0;       ///< departure elevation (rad, from +z)
  double phi = 0.0;         ///< departure azimuth (rad, from +x)
  double r = 0.0;           ///< scatterer range from the array origin (m)
  double tau0 = 0.0;        ///< initial propagation delay (s)
  double omega_hz = 0.0;    ///< Doppler shift (Hz)
  std::vector<cxd> gains;   ///< complex gain per UE port
};

/// One channel sample: the full array-by-subcarrier matrix at time t.
struct ChannelSnapshot {
  double t = 0.0;
  CMat h;  ///< n_elements x n_f
  /// Set when any path range fell inside the array aperture (model stressed).
  bool range_warning = false;
  /// Set by the predictor when it emitted a zero channel because the
  /// projected record had no support (e.g. an all-zero input).
  bool empty_prediction = false;
};

/// Per-subcarrier delay-Doppler phase vector b(tau0, omega, t), length n_f.
CVec delay_doppler_vector(const ScenarioConfig& cfg, double tau0, double omega_hz,
                          double t);

/// Synthesize the channel matrix at time t for one UE port.
ChannelSnapshot synthesize_channel(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                                   const std::vector<PathParams>& paths, double t,
                                   int port = 0,
                                   WavefrontMode mode = WavefrontMode::fresnel);

/// Add per-entry complex white noise at the requested SNR (dB), measured
/// against the mean entry power of the snapshot. Deterministic in the seed.
ChannelSnapshot observe(const ChannelSnapshot& snapshot, double snr_db, uint64_t seed);

/// RMS angular spread per dimension (radians).
struct AngularSpreads {
  double eod = 0.0;  ///< elevation of departure
  double aod = 0.0;  ///< azimuth of departure
  double eoa = 0.0;  ///< elevation of arrival
  double aoa = 0.0;  ///< azimuth of arrival
};

/// Clustered-scatterer generator settings.
struct ScenarioGenParams {
  int n_clusters = 9;
  int rays_per_cluster = 20;
  double r_min = 30.0;       ///< scatterer range band (m)
  double r_max = 45.0;
  AngularSpreads spreads{0.05, 0.05, 0.05, 0.05};
  double speed_mps = 0.0;    ///< UE speed; heading is drawn per seed
  int n_ports = 2;
};

/**
 * @brief Draw a clustered multipath scenario.
 *
 * Cluster mean angles are uniform (elevation over the middle half of [0, pi],
 * azimuth within +-0.45 pi of broadside, for departure and arrival alike);
 * per-ray offsets are Gaussian with the configured RMS spreads; ranges are
 * uniform in [r_min, r_max]; tau_0 = r / c; the Doppler of each ray is the
 * projection of one random-heading UE velocity onto the ray's arrival
 * direction. Per-port gains are i.i.d. CN(0,1), normalized so the total path
 * power per port is exactly 1.
 */
std::vector<PathParams> generate_scenario(const ScenarioConfig& cfg,
                                          const ScenarioGenParams& params, uint64_t seed);

}  // namespace wtmp
