/**
 * @file wtmp.cpp
 * @brief Command-line harness around the wtmp library.
 *
 * Subcommands:
 *   synth      synthesize a channel record to a binary dump
 *   estimate   greedy path estimation on a recorded snapshot
 *   transform  wavefront-transform quality against the planar reference
 *   predict    pencil prediction on a recorded channel dump
 *   evaluate   multi-user spectral-efficiency sweep across baselines
 *   figure     canned experiment sweeps by figure id {2,3,4,5,6,7}
 *
 * Every run is a deterministic function of (config, seed) and writes a
 * manifest capturing both next to its outputs. Exit codes: 0 success,
 * 2 configuration/usage error, 3 numerical failure, 4 I/O failure.
 * The WTMP_THREADS environment variable caps the worker pool.
 */

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wtmp/estimation.hpp"
#include "wtmp/experiment.hpp"
#include "wtmp/io.hpp"
#include "wtmp/metrics.hpp"
#include "wtmp/predictor.hpp"
#include "wtmp/tf_dictionary.hpp"
#include "wtmp/transform.hpp"
#include "wtmp/version.hpp"

namespace {

using namespace wtmp;

namespace fs = std::filesystem;

/// splitmix64 step, matching the experiment driver's seed derivation.
uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOpts {
  std::string preset = "desk";
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool seed_set = false;
  std::string variant;
  std::string input_path;  // only bound on subcommands that read a dump
};

/// Resolve preset -> config file overlay -> command-line overrides.
RunConfig resolve_config(const CommonOpts& opt) {
  RunConfig cfg = preset_config(opt.preset);
  if (!opt.config_path.empty()) apply_config_file(cfg, opt.config_path);
  if (opt.seed_set) cfg.exp.seed0 = opt.seed;
  if (!opt.variant.empty()) {
    if (opt.variant == "standard")
      cfg.exp.variant = PencilVariant::standard;
    else if (opt.variant == "difference")
      cfg.exp.variant = PencilVariant::difference;
    else
      throw config_error("unknown --variant '" + opt.variant + "'");
  }
  cfg.validate();
  return cfg;
}

fs::path ensure_out_dir(const CommonOpts& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw io_error("cannot create output directory '" + opt.out_dir +
                   "': " + ec.message());
  return dir;
}

/// Paths for this run: explicit from the config when given, otherwise drawn
/// from the clustered generator with the run seed.
std::vector<PathParams> resolve_paths(const RunConfig& cfg) {
  if (!cfg.paths.empty()) return cfg.paths;
  return generate_scenario(cfg.exp.scenario, cfg.exp.gen, cfg.exp.seed0);
}

/// Synthesize the observed record (slots 1..n_s, port 0), mirroring the
/// experiment driver: observation noise applies to the record only.
std::vector<ChannelSnapshot> make_record(const RunConfig& cfg,
                                         const std::vector<PathParams>& paths) {
  const auto& e = cfg.exp;
  const ScenarioConfig& sc = e.scenario;
  std::vector<ChannelSnapshot> record;
  record.reserve(sc.n_s);
  for (int k = 1; k <= sc.n_s; ++k) {
    ChannelSnapshot snap = synthesize_channel(e.geom, sc, paths,
                                              k * sc.t_slot_s, 0, e.mode);
    if (std::isfinite(e.obs_snr_db))
      snap = observe(snap, e.obs_snr_db, mix_seed(e.seed0 ^ uint64_t(k)));
    record.push_back(std::move(snap));
  }
  return record;
}

Dictionary make_omp_dictionary(const RunConfig& cfg) {
  const auto& e = cfg.exp;
  double r_lo = std::max(0.5 * e.gen.r_min, 0.5);
  double r_hi = 1.5 * e.gen.r_max;
  if (!cfg.paths.empty()) {
    // Explicit paths may lie outside the generator's range band; widen the
    // dictionary to bracket them.
    for (const auto& p : cfg.paths) {
      r_lo = std::min(r_lo, 0.5 * p.r);
      r_hi = std::max(r_hi, 1.5 * p.r);
    }
  }
  return build_dictionary(
      e.geom, e.scenario,
      make_polar_grid(e.grid_thetas, kPi / 4, 3 * kPi / 4, 1, 0.0, 0.0,
                      e.grid_ranges, r_lo, r_hi));
}

void write_manifest_for(const fs::path& dir, const std::string& command,
                        const RunConfig& cfg,
                        const std::vector<std::string>& outputs,
                        const std::map<std::string, double>& details) {
  RunManifest m;
  m.command = command;
  m.config = cfg;
  m.outputs = outputs;
  m.details = details;
  write_manifest((dir / (command + "_manifest.json")).string(), m);
}

// ---------------------------------------------------------------------------
// synth: channel record (plus optional future truth) -> binary dump
// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& opt) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  const auto& e = cfg.exp;
  const ScenarioConfig& sc = e.scenario;

  const std::vector<PathParams> paths = resolve_paths(cfg);
  std::vector<ChannelSnapshot> snaps = make_record(cfg, paths);
  // Explicitly requested horizons append clean future truth after the record,
  // which `predict` can evaluate against.
  const int trailing = std::max(0, cfg.n_predict);
  for (int k = sc.n_s + 1; k <= sc.n_s + trailing; ++k)
    snaps.push_back(
        synthesize_channel(e.geom, sc, paths, k * sc.t_slot_s, 0, e.mode));

  const std::string dump = (dir / "channels.bin").string();
  write_channel_dump(dump, snaps);

  write_manifest_for(dir, "synth", cfg, {dump},
                     {{"n_paths", double(paths.size())},
                      {"n_snapshots", double(snaps.size())},
                      {"n_record", double(sc.n_s)},
                      {"n_future", double(trailing)},
                      {"n_elements", double(e.geom.n_elements())},
                      {"n_subcarriers", double(sc.n_f)}});
  std::cout << "synth: " << snaps.size() << " snapshots ("
            << e.geom.n_elements() << " x " << sc.n_f << "), "
            << paths.size() << " paths -> " << dump << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// estimate: greedy path estimation on the last record snapshot of a dump
// ---------------------------------------------------------------------------

int cmd_estimate(const CommonOpts& opt) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  const auto& e = cfg.exp;

  const std::vector<ChannelSnapshot> snaps = read_channel_dump(opt.input_path);
  if (Eigen::Index(snaps.size()) < e.scenario.n_s)
    throw config_error("estimate: input has " + std::to_string(snaps.size()) +
                       " snapshots but the configured record needs " +
                       std::to_string(e.scenario.n_s));
  if (snaps.front().h.rows() != e.geom.n_elements() ||
      snaps.front().h.cols() != e.scenario.n_f)
    throw config_error(
        "estimate: input dump dimensions do not match the configuration");

  const CVec y = snaps[std::size_t(e.scenario.n_s) - 1].h.col(0);
  const Dictionary dict = make_omp_dictionary(cfg);
  const PathEstimate est =
      omp_estimate(y, dict, e.omp_max_paths, e.omp_residual_tol);

  const std::string csv = (dir / "estimates.csv").string();
  {
    std::ofstream f(csv, std::ios::trunc);
    if (!f.good()) throw io_error("cannot open '" + csv + "' for writing");
    f << "path,theta,phi,r,gain_re,gain_im\n";
    for (int p = 0; p < est.p_hat; ++p)
      f << p << ',' << fmt_double(est.theta[p]) << ','
        << fmt_double(est.phi[p]) << ',' << fmt_double(est.r[p]) << ','
        << fmt_double(est.gains[p].real()) << ','
        << fmt_double(est.gains[p].imag()) << '\n';
    f.flush();
    if (!f.good()) throw io_error("write failed for '" + csv + "'");
  }

  const double y_norm = y.norm();
  write_manifest_for(
      dir, "estimate", cfg, {csv},
      {{"p_hat", double(est.p_hat)},
       {"residual_norm", est.residual_norm},
       {"residual_rel", y_norm > 0 ? est.residual_norm / y_norm : 0.0}});
  std::cout << "estimate: " << est.p_hat << " paths, relative residual "
            << fmt_double(y_norm > 0 ? est.residual_norm / y_norm : 0.0)
            << " -> " << csv << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// transform: wavefront-transform quality against the planar reference
// ---------------------------------------------------------------------------

int cmd_transform(const CommonOpts& opt) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  const auto& e = cfg.exp;
  const double t_obs = e.scenario.n_s * e.scenario.t_slot_s;

  const std::vector<PathParams> paths = resolve_paths(cfg);
  ChannelSnapshot snap =
      synthesize_channel(e.geom, e.scenario, paths, t_obs, 0, e.mode);
  if (std::isfinite(e.obs_snr_db))
    snap = observe(snap, e.obs_snr_db,
                   mix_seed(e.seed0 ^ uint64_t(e.scenario.n_s)));

  const Dictionary dict = make_omp_dictionary(cfg);
  const PathEstimate est = omp_estimate(snap.h.col(0), dict, e.omp_max_paths,
                                        e.omp_residual_tol);
  if (est.p_hat == 0)
    throw numerical_error("transform: the greedy estimator recovered no paths");

  const TransformMatrix bn = build_transform(e.geom, e.scenario, est);
  const TransformNmse nmse =
      transform_nmse(e.geom, e.scenario, paths, bn, e.mode, t_obs);

  const std::string csv = (dir / "transform.csv").string();
  write_kv_csv(csv, {{"nmse_with_transform", nmse.with_bn},
                     {"nmse_without_transform", nmse.without_bn},
                     {"p_hat", double(est.p_hat)},
                     {"n_paths", double(paths.size())}});
  write_manifest_for(dir, "transform", cfg, {csv},
                     {{"nmse_with_transform", nmse.with_bn},
                      {"nmse_without_transform", nmse.without_bn},
                      {"p_hat", double(est.p_hat)}});
  std::cout << "transform: planar mismatch " << fmt_double(nmse.with_bn)
            << " with transform, " << fmt_double(nmse.without_bn)
            << " without -> " << csv << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict: pencil prediction on a recorded dump, evaluated against any
// trailing truth snapshots the dump carries
// ---------------------------------------------------------------------------

int cmd_predict(const CommonOpts& opt) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  const auto& e = cfg.exp;
  const ScenarioConfig& sc = e.scenario;

  const std::vector<ChannelSnapshot> snaps = read_channel_dump(opt.input_path);
  if (Eigen::Index(snaps.size()) < sc.n_s)
    throw config_error("predict: input has " + std::to_string(snaps.size()) +
                       " snapshots but the configured record needs " +
                       std::to_string(sc.n_s));
  if (snaps.front().h.rows() != e.geom.n_elements() ||
      snaps.front().h.cols() != sc.n_f)
    throw config_error(
        "predict: input dump dimensions do not match the configuration");

  const std::vector<ChannelSnapshot> record(snaps.begin(),
                                            snaps.begin() + sc.n_s);
  const int trailing = int(snaps.size()) - sc.n_s;
  const int horizon = trailing > 0 ? trailing : cfg.predict_horizon();
  if (horizon < 1)
    throw config_error("predict: prediction horizon must be >= 1");

  const Dictionary dict = make_omp_dictionary(cfg);
  const PathEstimate est = omp_estimate(record.back().h.col(0), dict,
                                        e.omp_max_paths, e.omp_residual_tol);
  if (est.p_hat == 0)
    throw numerical_error("predict: the greedy estimator recovered no paths");

  const TransformMatrix bn = build_transform(e.geom, sc, est);
  const TfDictionary tf(sc);
  PencilConfig pc;
  pc.pencil_size = e.pencil_size;
  pc.n_predict = horizon;
  pc.variant = e.variant;
  const int max_order = e.variant == PencilVariant::difference
                            ? (sc.n_s - 2) / 2
                            : (sc.n_s - 1) / 2;
  const int order = std::max(1, std::min(est.p_hat, max_order));

  const ChannelSnapshot pred =
      predict_channel(record, e.geom, est, bn, tf, pc, e.gamma1, order);

  const bool have_truth = trailing > 0;
  const ChannelSnapshot* truth = have_truth ? &snaps.back() : nullptr;

  const std::string csv = (dir / "prediction.csv").string();
  {
    std::ofstream f(csv, std::ios::trunc);
    if (!f.good()) throw io_error("cannot open '" + csv + "' for writing");
    f << "subcarrier,predicted_power,ref_power,error_power\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int m = 0; m < sc.n_f; ++m) {
      const double pp = pred.h.col(m).squaredNorm();
      const double rp = have_truth ? truth->h.col(m).squaredNorm() : nan;
      const double ep =
          have_truth ? (pred.h.col(m) - truth->h.col(m)).squaredNorm() : nan;
      f << m << ',' << fmt_double(pp) << ',' << fmt_double(rp) << ','
        << fmt_double(ep) << '\n';
    }
    f.flush();
    if (!f.good()) throw io_error("write failed for '" + csv + "'");
  }

  std::map<std::string, double> details{{"horizon_slots", double(horizon)},
                                        {"p_hat", double(est.p_hat)},
                                        {"pencil_order", double(order)}};
  if (have_truth) {
    const double ref = truth->h.squaredNorm();
    const double err = (pred.h - truth->h).squaredNorm();
    const double ratio = ref > 0 ? err / ref : 0.0;
    details["error_ratio"] = ratio;
    details["error_db"] = prediction_error_db(pred.h, truth->h);
    std::cout << "predict: horizon " << horizon
              << " slots, normalized error " << fmt_double(ratio) << " ("
              << fmt_double(details["error_db"]) << " dB) -> " << csv << "\n";
  } else {
    std::cout << "predict: horizon " << horizon
              << " slots, no reference truth in input -> " << csv << "\n";
  }
  write_manifest_for(dir, "predict", cfg, {csv}, details);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate: spectral-efficiency sweep across baselines
// ---------------------------------------------------------------------------

int cmd_evaluate(const CommonOpts& opt) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  if (!cfg.paths.empty())
    throw config_error(
        "evaluate draws per-UE scenarios from the generator; explicit paths "
        "are not supported");

  std::vector<BaselineKind> kinds = cfg.baselines;
  if (kinds.empty())
    kinds = {BaselineKind::stationary, BaselineKind::no_prediction,
             BaselineKind::wtmp, BaselineKind::wtmp_no_transform,
             BaselineKind::wtmp_static_dict};

  const std::vector<ExperimentResult> results =
      figure_se_vs_snr(cfg.exp, kinds);

  const std::string csv = (dir / "evaluate.csv").string();
  write_results_csv(csv, results);
  write_manifest_for(dir, "evaluate", cfg, {csv},
                     {{"n_baselines", double(kinds.size())},
                      {"n_seeds", double(cfg.exp.n_seeds)}});
  std::cout << "evaluate: " << kinds.size() << " baselines x "
            << cfg.exp.snr_grid_db.size() << " SNR points over "
            << cfg.exp.n_seeds << " seeds -> " << csv << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// figure: canned sweeps by id
// ---------------------------------------------------------------------------

int cmd_figure(const CommonOpts& opt, int figure_id) {
  const RunConfig cfg = resolve_config(opt);
  const fs::path dir = ensure_out_dir(opt);
  if (!cfg.paths.empty())
    throw config_error(
        "figure sweeps draw scenarios from the generator; explicit paths are "
        "not supported");

  const std::vector<ExperimentResult> results =
      run_figure(figure_id, cfg.exp);

  const std::string name = "figure" + std::to_string(figure_id);
  const std::string csv = (dir / (name + ".csv")).string();
  write_results_csv(csv, results);

  RunManifest m;
  m.command = name;
  m.config = cfg;
  m.outputs = {csv};
  m.details = {{"figure_id", double(figure_id)},
               {"n_series", double(results.size())}};
  write_manifest((dir / (name + "_manifest.json")).string(), m);
  std::cout << name << ": " << results.size() << " series -> " << csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "wtmp: near-field channel prediction experiments\n"
      "Runs are deterministic in (config, seed); every command writes a\n"
      "manifest capturing both. WTMP_THREADS caps the worker pool.\n"};
  app.set_version_flag("--version", std::string(kGitRevision));
  app.require_subcommand(1);

  CommonOpts opt;
  int figure_id = 0;

  const auto add_common = [&](CLI::App* sub, bool takes_input) {
    sub->add_option("--preset", opt.preset, "configuration preset")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    sub->add_option("--config", opt.config_path,
                    "JSON config overlay applied on top of the preset");
    sub->add_option("--out", opt.out_dir, "output directory")
        ->capture_default_str();
    sub->add_option("--seed", opt.seed, "base seed (overrides the config)")
        ->each([&](const std::string&) { opt.seed_set = true; });
    sub->add_option("--variant", opt.variant,
                    "matrix-pencil variant (overrides the config)")
        ->check(CLI::IsMember({"standard", "difference"}));
    if (takes_input)
      sub->add_option("--input", opt.input_path, "channel dump to read")
          ->required();
  };

  CLI::App* synth =
      app.add_subcommand("synth", "synthesize a channel record to a dump");
  add_common(synth, false);
  CLI::App* estimate = app.add_subcommand(
      "estimate", "greedy path estimation on a recorded snapshot");
  add_common(estimate, true);
  CLI::App* transform = app.add_subcommand(
      "transform", "wavefront-transform quality vs the planar reference");
  add_common(transform, false);
  CLI::App* predict = app.add_subcommand(
      "predict", "pencil prediction on a recorded channel dump");
  add_common(predict, true);
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "multi-user spectral-efficiency sweep across baselines");
  add_common(evaluate, false);
  CLI::App* figure =
      app.add_subcommand("figure", "canned experiment sweep by figure id");
  figure->add_option("id", figure_id, "figure id in {2,3,4,5,6,7}")
      ->required();
  add_common(figure, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(opt);
    if (estimate->parsed()) return cmd_estimate(opt);
    if (transform->parsed()) return cmd_transform(opt);
    if (predict->parsed()) return cmd_predict(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (figure->parsed()) return cmd_figure(opt, figure_id);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
