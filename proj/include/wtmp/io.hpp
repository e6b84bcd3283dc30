#pragma once

/**
 * @file io.hpp
 * @brief Artifact plumbing: binary channel dumps, CSV tables, run manifests,
 *        and the structured run-configuration format used by the CLI.
 *
 * Everything here is deterministic: the same inputs produce byte-identical
 * files, so runs can be diffed and reproduced from (config, seed) alone.
 */

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/experiment.hpp"

namespace wtmp {

// ---------------------------------------------------------------------------
// Binary channel dumps
// ---------------------------------------------------------------------------

/// Magic prefix of the binary channel format.
inline constexpr char kChannelMagic[8] = {'W', 'T', 'M', 'P',
                                          'C', 'H', 'A', 'N'};

/**
 * @brief Write snapshots in the binary channel format.
 *
 * Layout (native little-endian words):
 *   bytes 0..7   magic "WTMPCHAN"
 *   3 x u64      n_snapshots, n_t, n_f
 *   per snapshot f64 t, then n_t*n_f entries column-major as (re f64, im f64)
 *
 * All snapshots must share one (n_t, n_f) shape. Diagnostic flags
 * (range_warning, empty_prediction) are not persisted. Throws config_error on
 * empty/ragged input and io_error when the file cannot be written.
 */
void write_channel_dump(const std::string& path,
                        const std::vector<ChannelSnapshot>& snaps);

/// Read a channel dump written by write_channel_dump. Throws io_error on a
/// missing file, bad magic, truncation, or implausible header dimensions.
std::vector<ChannelSnapshot> read_channel_dump(const std::string& path);

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

/// Write experiment results in long form with the fixed header
/// `series,metric,axis_name,axis,mean,stderr,n` — one row per series and
/// axis point, `%.17g` formatting for exact round-trips.
void write_results_csv(const std::string& path,
                       const std::vector<ExperimentResult>& results);

/// Two-column scalar summary table with the fixed header `quantity,value`.
void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, double>>& rows);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/**
 * @brief Everything one CLI run needs: scenario, knobs, and sweep shape.
 *
 * The experiment block carries the scenario, geometry, generator, and
 * algorithm knobs; explicit paths (when given) replace the clustered
 * generator in the single-run commands. Loading is overlay-style: start from
 * a preset, apply the config file's sections on top.
 */
struct RunConfig {
  ExperimentConfig exp;

  /// Explicit paths for synth/estimate/transform/predict; empty means "draw
  /// a clustered scenario from the seed". Sweep commands require a generator.
  std::vector<PathParams> paths;

  /// Prediction horizon (slots) for the predict command; -1 follows
  /// exp.csi_delay_slots.
  int n_predict = -1;

  /// Baselines evaluated by the evaluate command; empty means all five.
  std::vector<BaselineKind> baselines;

  int predict_horizon() const {
    return n_predict >= 0 ? n_predict : exp.csi_delay_slots;
  }
  /// Validates the nested blocks and the cross-field rules.
  void validate() const;
};

/// Built-in starting points: "desk" (CI-scale defaults) and "paper"
/// (512-antenna 2x256 half-wavelength panel, 16 UEs, 30x6 = 180 paths).
RunConfig preset_config(const std::string& name);

/**
 * @brief Overlay a JSON config file onto @p cfg.
 *
 * The file must carry `schema_version: 1`. Sections: scenario, geometry,
 * generator, paths, algorithm, experiment — all optional, all partial.
 * Unknown keys anywhere are rejected with config_error naming the key.
 * A scenario.f_c_hz change re-derives half-wavelength element pitches unless
 * the file pins geometry.d_h/d_v itself. Throws io_error when the file
 * cannot be read and config_error on malformed JSON or bad values.
 */
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Deterministic (sorted-key, compact) JSON dump of the fully resolved
/// effective configuration; the manifest hash is computed over these bytes.
std::string canonical_config_json(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit hash (offset 0xcbf29ce484222325, prime 0x100000001b3).
uint64_t fnv1a64(std::string_view bytes);

/// Fixed-width lowercase hex of a 64-bit word, e.g. "00ff00ff00ff00ff".
std::string hex64(uint64_t v);

/**
 * @brief Machine-readable record of one CLI run.
 *
 * Serialized as JSON with schema_version 1: command, git revision, thread
 * budget, seed, config hash (fnv1a64 over canonical_config_json), the
 * embedded effective config, the list of files written, and numeric
 * command-specific details (path counts, error summaries, ...).
 */
struct RunManifest {
  std::string command;
  RunConfig config;
  std::vector<std::string> outputs;
  std::map<std::string, double> details;
};

/// Write the manifest JSON. Throws io_error when the file cannot be written.
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace wtmp
