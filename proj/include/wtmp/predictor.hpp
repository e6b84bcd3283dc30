#pragma once

/**
 * @file predictor.hpp
 * @brief Pole-based channel prediction on the angular/delay/Doppler record.
 *
 * Pipeline: a record of n_s snapshots is flattened by the wavefront transform
 * (transform.hpp), mapped to the angular domain by unitary DFTs along both
 * array axes, and correlated snapshot-by-snapshot against the delay-Doppler
 * blocks of a TfDictionary, each sample against the block tuned to its own
 * time index. Averaging those time-matched correlations over the record
 * gives one statistic per (doppler bin, delay bin, angular bin) triple; a
 * fractional-energy rule selects the support.
 *
 * Each selected triple carries an n_s-long coefficient series per subcarrier;
 * on an on-model record every such series is an exact mixture of at most P
 * complex exponentials, so a matrix-pencil fit recovers its poles and
 * continues it. The continued per-subcarrier values are summed into one
 * scalar future coefficient per triple, which then multiplies that triple's
 * future-time dictionary column. Because the doppler bins of one
 * (delay, angular) cell are redundant copies of the same coefficient -- the
 * bin modulation cancels between the analysis correlation and the future
 * synthesis column -- the synthesis averages the kept bins within each cell.
 * With the full support (gamma1 = 1) the average is the exact frame inverse
 * and the no-extrapolation pipeline is an identity for any record; with a
 * sparse support each kept bin still contributes the cell at full amplitude,
 * so on-model channels survive aggressive truncation unchanged.
 */

#include <cstddef>
#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/estimation.hpp"
#include "wtmp/tf_dictionary.hpp"
#include "wtmp/transform.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Matrix-pencil flavor.
enum class PencilVariant {
  standard,   ///< Hankel row-shift pencil on the raw series
  difference  ///< pencil on the first-difference series; offset-invariant
};

/// Pencil and prediction-horizon settings.
struct PencilConfig {
  /// Rows of the Hankel window; 0 selects floor(n_samples / 2) clamped into
  /// the admissible range. Must satisfy p < pencil_size < n - p + 1
  /// (standard) or p < pencil_size < n - p (difference).
  int pencil_size = 0;
  /// Steps ahead to predict (>= 1; 0 reproduces the last sample, a test hook).
  int n_predict = 1;
  PencilVariant variant = PencilVariant::standard;
};

/// Admissible default pencil size for a series of n samples and model order p.
int default_pencil_size(int n_samples, int p, PencilVariant variant);

/// One selected coefficient triple. doppler_bin is 1-based (bin 1 = static);
/// delay_bin indexes the subcarrier-DFT grid and angular_bin the flattened
/// element-DFT grid, both 0-based.
struct SupportIndex {
  int doppler_bin = 1;
  Eigen::Index delay_bin = 0;
  Eigen::Index angular_bin = 0;
};

/**
 * @brief Result of projecting a snapshot record onto the
 * angular/delay/Doppler grid.
 *
 * support lists the selected triples in descending statistic order;
 * constituents[i] is the n_s x n_f matrix of per-snapshot, per-subcarrier
 * correlation series for support[i]; z keeps the transformed angular-domain
 * record (one n_elements x n_f matrix per snapshot) for reconstruction.
 */
struct ProjectedSeries {
  std::vector<SupportIndex> support;
  std::vector<CMat> constituents;
  RVec weights;               ///< statistic energy per selected triple
  double gamma1 = 0.99;
  double total_weight = 0.0;     ///< statistic energy summed over every triple
  double captured_weight = 0.0;  ///< energy sum over the selected prefix
  bool empty_support = false;    ///< no energy anywhere (zero record)
  std::vector<CMat> z;   ///< transformed record, one matrix per snapshot
  std::vector<double> times;  ///< snapshot timestamps

  /// Aggregate time series of support[i]: constituents summed across
  /// subcarriers (length n_s).
  CVec chi(std::size_t i) const;
};

/// Angular-domain map: unitary DFTs along both array axes applied to each
/// column of h (n_elements x n_f); angular_synthesize is its exact inverse.
CMat angular_project(const CMat& h, const ArrayGeometry& geom);
CMat angular_synthesize(const CMat& zmat, const ArrayGeometry& geom);

/**
 * @brief Project a snapshot record and select its support.
 *
 * samples.size() must equal the dictionary's n_s and be equally spaced at
 * the dictionary's slot duration. gamma1 in (0, 1]: smallest
 * descending-energy prefix whose statistic energy reaches gamma1 * total
 * (ties broken toward the lower linear index; gamma1 = 1 selects every
 * nonzero triple).
 */
ProjectedSeries project(const std::vector<ChannelSnapshot>& samples,
                        const ArrayGeometry& geom, const TransformMatrix& bn,
                        const TfDictionary& tf, double gamma1 = 0.99);

/// Matrix-pencil fit artifacts for one series.
struct PencilFit {
  CVec zhat;  ///< estimated poles (p of them), by descending magnitude
  CMat d1;    ///< pencil_size x (n - pencil_size + 1) Hankel of the series
  CMat e1;    ///< pencil_size x p Vandermonde, e1(i, q) = zhat(q)^i
  CMat e2;    ///< p x (n - pencil_size + 1) Vandermonde, e2(q, k) = zhat(q)^k
};

/// Fit p poles to a series with the standard Hankel row-shift pencil.
/// Throws config_error on bound violations, numerical_error on degenerate
/// input (zero series) or eigensolver failure.
PencilFit mp_fit(const CVec& series, const PencilConfig& cfg, int p);

/// Poles of the difference series (offset-invariant). Throws numerical_error
/// when the differenced Hankel collapses (constant series).
CVec mp_fit_difference(const CVec& series, const PencilConfig& cfg, int p);

/**
 * @brief Doppler frequency estimates (Hz) from one correlation series.
 *
 * Pole angles are mapped through the carrier-scaled slot rotation
 * angle * f_c / (2 pi (f_c + f_subcarrier) T); returned sorted ascending.
 * Honors cfg.variant.
 */
RVec mp_estimate(const CVec& series, const PencilConfig& cfg, int p,
                 double f_c_hz, double f_subcarrier_hz, double t_slot_s);

/// Difference-pencil variant of mp_estimate (constant-offset invariant).
RVec mp_estimate_difference(const CVec& series, const PencilConfig& cfg, int p,
                            double f_c_hz, double f_subcarrier_hz,
                            double t_slot_s);

/**
 * @brief Continue a fitted series n_steps ahead.
 *
 * Each step rebuilds the shifted Hankel from the fitted poles
 * (e1 diag(zhat) e1^+ d1 e2^+ e2), takes its last entry as the new sample,
 * and slides the window by one column. Returns the n_steps new samples.
 */
CVec extrapolate(const CMat& d1, const CVec& zhat, const CMat& e1,
                 const CMat& e2, int n_steps);

/**
 * @brief Full prediction pipeline: project, select, fit, extrapolate,
 * reconstruct.
 *
 * Returns the predicted snapshot at samples.back().t + n_predict * T. The
 * pencil model order is est.p_hat unless p_override > 0. Per-series rank
 * collapses fall back to constant continuation. With an empty support the
 * result is a zero channel with empty_prediction set. series_out (optional)
 * receives the projection diagnostics.
 */
ChannelSnapshot predict_channel(const std::vector<ChannelSnapshot>& samples,
                                const ArrayGeometry& geom, const PathEstimate& est,
                                const TransformMatrix& bn, const TfDictionary& tf,
                                const PencilConfig& cfg, double gamma1 = 0.99,
                                int p_override = -1,
                                ProjectedSeries* series_out = nullptr);

}  // namespace wtmp
