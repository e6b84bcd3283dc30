#pragma once

/**
 * @file metrics.hpp
 * @brief Evaluation metrics: normalized prediction error, transform quality
 *        against the planar reference, eigen-based zero-forcing precoding,
 *        and multi-user spectral efficiency.
 */

#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/geometry.hpp"
#include "wtmp/transform.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Floor returned by prediction_error_db for (near-)exact predictions.
inline constexpr double kPredictionErrorFloorDb = -200.0;

/**
 * @brief Normalized prediction error in dB.
 *
 * 10 log10 of the mean over the given pairs of ||h_hat - h||_F^2 / ||h||_F^2.
 * Pairs typically range over time, frequency, and UEs. Exact predictions are
 * floored at kPredictionErrorFloorDb instead of -inf. Throws config_error on
 * an empty list, mismatched shapes, or a zero reference channel.
 */
double prediction_error_db(const std::vector<CMat>& h_hat,
                           const std::vector<CMat>& h_true);

/// Single-pair convenience overload.
double prediction_error_db(const CMat& h_hat, const CMat& h_true);

/// Normalized mismatch to the planar reference with and without the
/// wavefront transform applied.
struct TransformNmse {
  double with_bn = 0.0;     ///< ||Bn h - h_plane||^2 / ||h_plane||^2
  double without_bn = 0.0;  ///< ||h - h_plane||^2 / ||h_plane||^2
};

/**
 * @brief Core form: compare a channel against its planar reference.
 *
 * @param h        channel sample (n_elements x n_f)
 * @param bn       wavefront transform under evaluation
 * @param h_plane  the same paths synthesized with planar (far-field) steering
 */
TransformNmse transform_nmse(const CMat& h, const TransformMatrix& bn,
                             const CMat& h_plane);

/**
 * @brief Scenario convenience: synthesize the channel (given wavefront mode)
 * and its planar reference from identical path parameters at time t, average
 * the NMSE over all UE ports.
 */
TransformNmse transform_nmse(const ArrayGeometry& geom, const ScenarioConfig& cfg,
                             const std::vector<PathParams>& paths,
                             const TransformMatrix& bn,
                             WavefrontMode mode = WavefrontMode::fresnel,
                             double t = 0.0);

/**
 * @brief Reduce one UE's port-stacked channel (n_ports x n_t) to its
 * effective row: the dominant left singular vector applied to the matrix.
 */
CVec effective_row(const CMat& ue_channel);

/// Eigen-based zero-forcing precoder.
struct EzfPrecoder {
  CMat w;            ///< n_t x n_ue, unit-norm columns
  CMat h_eff;        ///< n_ue x n_t effective rows (one per UE)
  bool regularized = false;  ///< set when the inverse needed regularization
};

/**
 * @brief Eigen-based zero-forcing from per-UE CSI.
 *
 * Each entry of @p ue_channels is one UE's port-stacked channel (n_ports x
 * n_t) at the precoding instant. The effective row per UE is its dominant
 * left singular vector applied to the channel; the precoder is
 * H_eff^H (H_eff H_eff^H)^{-1} with unit-norm columns, so
 * h_eff,u * w_v == 0 for u != v when H_eff is well conditioned. A
 * rank-deficient H_eff gets a regularized inverse, flags the result, and
 * warns on stderr.
 */
EzfPrecoder ezf_precode(const std::vector<CMat>& ue_channels);

/**
 * @brief Sum spectral efficiency (bits/s/Hz) at one transmission instant.
 *
 * @param true_ue_channels per-UE port-stacked TRUE channels (n_ports x n_t)
 *                         at the transmission instant
 * @param w                precoder columns (n_t x n_ue), typically from CSI
 *                         that may be outdated or predicted
 * @param snr_db           per-UE transmit SNR rho in dB
 *
 * SINR_u = rho |h_u w_u|^2 / (1 + rho sum_{v != u} |h_u w_v|^2) with h_u the
 * true effective row; returns sum_u log2(1 + SINR_u). Averaging over time,
 * frequency, and seeds is the caller's loop.
 */
double spectral_efficiency(const std::vector<CMat>& true_ue_channels, const CMat& w,
                           double snr_db);

}  // namespace wtmp
