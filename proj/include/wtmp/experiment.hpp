#pragma once

/**
 * @file experiment.hpp
 * @brief Monte-Carlo experiment driver: multi-user prediction baselines,
 *        spectral-efficiency sweeps, and the figure-data generators behind
 *        the CLI `figure` command.
 *
 * Every experiment is a deterministic function of (config, seeds): trials
 * own their state and run fan-out across worker threads (WTMP_THREADS caps
 * the pool), and per-seed results land in preallocated slots so the output
 * is bit-for-bit independent of scheduling.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/geometry.hpp"
#include "wtmp/predictor.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Prediction strategies compared by the evaluation.
enum class BaselineKind {
  stationary,        ///< precode with true CSI at transmission time (upper bound)
  no_prediction,     ///< precode with CSI outdated by the configured delay
  wtmp,              ///< full pipeline: estimate, transform, project, pencil
  wtmp_no_transform, ///< ablation: identity wavefront transform
  wtmp_static_dict,  ///< ablation: time-invariant delay-Doppler dictionary
};

const char* baseline_name(BaselineKind kind);
BaselineKind baseline_from_name(const std::string& name);

/// One swept metric series with per-seed samples and summary statistics.
struct ExperimentResult {
  std::string metric;     ///< metric name, e.g. "spectral_efficiency"
  std::string series;     ///< series label, e.g. the baseline name
  std::string axis_name;  ///< swept quantity, e.g. "snr_db"
  RVec axis;              ///< axis values
  RMat samples;           ///< n_seeds x axis.size() per-seed samples
  RVec mean;              ///< per-axis mean over seeds
  RVec stderr_of_mean;    ///< per-axis standard error of the mean
  std::vector<uint64_t> seeds;  ///< seeds behind the rows, for reproducibility

  int sample_count() const { return int(samples.rows()); }
  /// Compute mean/stderr from samples and check the shape invariants.
  void finalize();
};

/// Scenario + algorithm knobs for one experiment sweep (desk-scale defaults).
struct ExperimentConfig {
  ScenarioConfig scenario;      ///< OFDM grid and record layout
  ArrayGeometry geom{1, 64, 0.5 * (kSpeedOfLight / 39e9),
                     0.5 * (kSpeedOfLight / 39e9)};
  ScenarioGenParams gen{2, 3, 30.0, 45.0, {0.05, 0.05, 0.05, 0.05},
                        120.0 / 3.6, 2};
  WavefrontMode mode = WavefrontMode::fresnel;

  int n_ues = 4;
  int csi_delay_slots = 32;  ///< prediction horizon = CSI outdating (slots)
  RVec snr_grid_db = (RVec(7) << -10, -5, 0, 5, 10, 15, 20).finished();
  /// SNR of the observed uplink record; +inf means noise-free observation.
  double obs_snr_db = std::numeric_limits<double>::infinity();

  int n_seeds = 20;
  uint64_t seed0 = 1;

  double gamma1 = 0.99;
  PencilVariant variant = PencilVariant::standard;
  int pencil_size = 0;  ///< 0 = automatic

  int omp_max_paths = 6;
  double omp_residual_tol = 0.05;
  int grid_thetas = 64;  ///< OMP dictionary elevation resolution
  int grid_ranges = 8;   ///< OMP dictionary range resolution

  void validate() const;
};

/// Worker-pool size: WTMP_THREADS when set (>= 1), else hardware concurrency.
int thread_budget();

/**
 * @brief Mean spectral efficiency versus SNR for one baseline.
 *
 * Per seed: draw cfg.n_ues independent clustered scenarios, form CSI at the
 * transmission instant according to the baseline, EZF-precode per subcarrier,
 * and average sum-SE over subcarriers against the true channels.
 */
ExperimentResult run_baseline(BaselineKind kind, const ExperimentConfig& cfg);

/// SE-vs-SNR sweeps for several baselines (shared seeds and scenarios).
std::vector<ExperimentResult> figure_se_vs_snr(const ExperimentConfig& cfg,
                                               const std::vector<BaselineKind>& kinds);

/**
 * @brief Prediction error (dB) versus array size with oracle path parameters.
 *
 * Per seed and per N_t: a fixed-range near-field scatterer set, oracle
 * wavefront transform, pencil continuation over the configured horizon,
 * error measured at the horizon against truth.
 */
ExperimentResult figure_error_vs_nt(const ExperimentConfig& cfg,
                                    const std::vector<int>& n_t_values);

/// Transform NMSE versus scatterer distance: series "with_transform" and
/// "without_transform" on a shared distance axis.
std::vector<ExperimentResult> figure_nmse_vs_distance(const ExperimentConfig& cfg,
                                                      const RVec& distances_m);

/**
 * @brief Figure-id dispatch used by the CLI.
 *
 * 2: SE vs SNR {stationary, no_prediction, wtmp} at the configured speed;
 * 4: id 2 plus the two ablations; 5: id 2 at double speed; 7: id 2 at
 * quarter speed; 3: prediction error vs N_t in {32, 64, 128, 256};
 * 6: transform NMSE vs distance. Throws config_error on any other id.
 */
std::vector<ExperimentResult> run_figure(int figure_id, const ExperimentConfig& cfg);

}  // namespace wtmp
