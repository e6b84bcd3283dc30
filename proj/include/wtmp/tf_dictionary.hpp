#pragma once

/**
 * @file tf_dictionary.hpp
 * @brief Delay-Doppler projection dictionary over the OFDM grid.
 *
 * A record of n_s equally spaced channel samples is analyzed against a bank
 * of delay-Doppler atoms. For Doppler bin n_s' (1-based; bin 1 is static)
 * and sample time index n_t (1-based, time n_t * T), the block
 *   W^{(n_t)}_{n_s'}  (n_f x n_f)
 * has entry (m, k_d) equal to
 *   (1/sqrt(n_f)) * exp(j 2 pi [ (1 + f_m/f_c)(n_s'-1) dw n_t T - m k_d / n_f ]),
 * i.e. a unitary DFT in the delay dimension modulated by a Doppler tone at
 * (n_s'-1) * dw, carrier-scaled per subcarrier. Bin 1 is exactly the unitary
 * DFT matrix. The delay phase is kept at baseband (m k_d / n_f) so that the
 * static bin coincides with the DFT; the Doppler phase uses the absolute
 * subcarrier frequency f_m.
 *
 * Per time index, D_{n_t} = [W_1 ... W_{n_s}] (n_f x n_f*n_s) satisfies
 * D_{n_t} D_{n_t}^H = n_s I. The full dictionary D = [D_1 ... D_{n_s}]
 * (n_f x n_f*n_s^2) satisfies D D^H = n_s^2 I, so its minimum-norm right
 * inverse is exactly D^H / n_s^2 -- the scaled adjoint used by project_tf.
 *
 * Sampling intervals: the delay grid step is dt = 1/(n_f * delta_f), the zero
 * of the delay column coherence; the Doppler grid step is
 * dw = f_c / (n_s * T * (f_c + f_1)), the zero of the time coherence at the
 * first subcarrier (an exact per-subcarrier variant is exposed for analysis).
 */

#include <cstddef>
#include <map>
#include <mutex>
#include <utility>

#include "wtmp/channel.hpp"
#include "wtmp/types.hpp"

namespace wtmp {

/// Delay grid step (seconds): 1 / (n_f * delta_f).
double delay_interval(const ScenarioConfig& cfg);

/// Doppler grid step (Hz): f_c / (n_s * T * (f_c + f_1)).
double doppler_interval(const ScenarioConfig& cfg);

/// Per-subcarrier exact Doppler step (Hz): f_c / (n_s * T * (f_c + f_m)),
/// m 0-based. Equals doppler_interval at m = 0.
double doppler_interval_exact(const ScenarioConfig& cfg, int m);

/**
 * @brief Normalized coherence between two delay atoms offset by dtau seconds.
 *
 * |sin(pi delta_f n_f dtau) / (n_f sin(pi delta_f dtau))|, in [0, 1]
 * (1 = parallel). Zero at every multiple of delay_interval that is not a
 * multiple of n_f of them.
 */
double delay_coherence(const ScenarioConfig& cfg, double dtau);

/**
 * @brief Normalized coherence between two Doppler tones offset by domega Hz,
 * observed over n_s samples at subcarrier m (0-based).
 *
 * |sin(pi x n_s) / (n_s sin(pi x))| with x = domega (1 + f_m/f_c) T.
 */
double doppler_coherence(const ScenarioConfig& cfg, double domega, int m);

/// One delay-Doppler block W^{(time_index)}_{doppler_bin}; both 1-based,
/// doppler_bin in [1, n_s], time_index >= 1 (may exceed n_s for prediction).
CMat build_block(const ScenarioConfig& cfg, int doppler_bin, int time_index);

/**
 * @brief Cached bank of delay-Doppler blocks for one scenario layout.
 *
 * Blocks are built lazily and cached (thread-safe, read-mostly). When the
 * dense dictionary fits under the materialization cap it is formed once and
 * reused by project_tf; otherwise projection streams block by block with
 * identical numerics.
 */
class TfDictionary {
 public:
  /// @param static_time when true, every block lookup resolves to the first
  /// time section: the bank degenerates to a classical time-invariant
  /// delay-Doppler dictionary (ablation baseline).
  explicit TfDictionary(const ScenarioConfig& cfg, bool static_time = false);

  const ScenarioConfig& config() const { return cfg_; }
  double delta_tau() const { return dtau_; }
  double delta_omega() const { return domega_; }
  bool static_time() const { return static_time_; }

  /// Number of coefficients produced by project_tf: n_f * n_s^2.
  Eigen::Index coeff_size() const;
  /// Coefficients per time section: n_f * n_s.
  Eigen::Index section_size() const;

  /// Cached block access; arguments as in build_block.
  const CMat& block(int doppler_bin, int time_index) const;

  /// Cap (in complex entries) for materializing the dense n_f x n_f*n_s^2
  /// dictionary. Default 1 << 22 (64 MiB).
  void set_materialize_cap(std::size_t max_entries);
  /// Dense dictionary if it fits under the cap, else nullptr.
  const CMat* materialized() const;

 private:
  ScenarioConfig cfg_;
  bool static_time_ = false;
  double dtau_ = 0.0;
  double domega_ = 0.0;
  std::size_t cap_ = std::size_t(1) << 22;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, int>, CMat> cache_;
  mutable CMat dense_;
  mutable bool dense_built_ = false;
};

/// How project_tf inverts the dictionary.
enum class TfPinv {
  scaled_adjoint,  ///< D^H / n_s^2 (exact minimum-norm inverse; default)
  svd              ///< numeric SVD pseudo-inverse (comparison path)
};

/**
 * @brief Project one n_f-sample x (taken at time time_index * T) onto the
 * full dictionary: coefficients D^H x / n_s^2, length n_f * n_s^2.
 *
 * Section n_t' (length n_f * n_s, blocks ordered by Doppler bin) holds the
 * correlations against the blocks tuned to time n_t'; section time_index is
 * the time-matched one that reconstruct_tf consumes.
 */
CVec project_tf(const CVec& x, const TfDictionary& dict, int time_index,
                TfPinv kind = TfPinv::scaled_adjoint);

/// Synthesize from the time-matched section: n_s * D_{time_index} *
/// coeffs[section time_index]. Exact inverse of project_tf for any x.
CVec reconstruct_tf(const CVec& coeffs, const TfDictionary& dict, int time_index);

/// Dense n_f x n_f*n_s^2 dictionary (test/diagnostic path; ignores the cap).
CMat materialize_dictionary(const TfDictionary& dict);

}  // namespace wtmp
