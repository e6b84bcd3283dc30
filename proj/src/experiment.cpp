#include "wtmp/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <limits>
#include <thread>

#include "wtmp/estimation.hpp"
#include "wtmp/metrics.hpp"
#include "wtmp/tf_dictionary.hpp"
#include "wtmp/transform.hpp"

namespace wtmp {

namespace {

/// splitmix64 step: decorrelates the per-UE / per-noise seeds drawn from one
/// trial seed without coupling nearby trials.
uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Run fn(i) for i in [0, n) on up to thread_budget() workers. Each index
/// owns its output slot, so results are scheduling-independent.
void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(n, thread_budget());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::future<void>> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    }));
  for (auto& f : pool) f.get();  // propagates the first worker exception
}

/// Port-stacked (n_ports x n_t) channel at subcarrier m from per-port
/// snapshots.
CMat port_stack(const std::vector<ChannelSnapshot>& per_port, int m) {
  const Eigen::Index n_ports = Eigen::Index(per_port.size());
  const Eigen::Index n_t = per_port.front().h.rows();
  CMat g(n_ports, n_t);
  for (Eigen::Index p = 0; p < n_ports; ++p)
    g.row(p) = per_port[p].h.col(m).transpose();
  return g;
}

struct UeCsi {
  std::vector<ChannelSnapshot> truth;  ///< per port, at the transmission instant
  std::vector<ChannelSnapshot> csi;    ///< per port, what the precoder sees
};

/// Everything shared read-only across trial workers for one sweep.
struct SweepContext {
  const ExperimentConfig& cfg;
  BaselineKind kind;
  TfDictionary tf;
  Dictionary omp_dict;

  SweepContext(const ExperimentConfig& c, BaselineKind k)
      : cfg(c),
        kind(k),
        tf(c.scenario, k == BaselineKind::wtmp_static_dict),
        omp_dict(build_dictionary(
            c.geom, c.scenario,
            make_polar_grid(c.grid_thetas, kPi / 4, 3 * kPi / 4, 1, 0.0, 0.0,
                            c.grid_ranges, std::max(0.5 * c.gen.r_min, 0.5),
                            1.5 * c.gen.r_max))) {}
};

/// CSI per baseline for one UE draw.
UeCsi make_ue_csi(const SweepContext& ctx, uint64_t ue_seed) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ScenarioConfig& sc = cfg.scenario;
  const double t_slot = sc.t_slot_s;
  const int n_ports = cfg.gen.n_ports;
  const double t_tx = (sc.n_s + cfg.csi_delay_slots) * t_slot;

  const std::vector<PathParams> paths = generate_scenario(sc, cfg.gen, ue_seed);

  UeCsi out;
  out.truth.reserve(n_ports);
  out.csi.reserve(n_ports);
  for (int port = 0; port < n_ports; ++port)
    out.truth.push_back(synthesize_channel(cfg.geom, sc, paths, t_tx, port, cfg.mode));

  switch (ctx.kind) {
    case BaselineKind::stationary:
      out.csi = out.truth;
      return out;
    case BaselineKind::no_prediction:
      for (int port = 0; port < n_ports; ++port)
        out.csi.push_back(
            synthesize_channel(cfg.geom, sc, paths, sc.n_s * t_slot, port, cfg.mode));
      return out;
    default:
      break;
  }

  // Prediction pipeline: record -> (noisy) observation -> greedy path
  // estimate on the latest snapshot -> wavefront transform -> projection and
  // pencil continuation out to the transmission instant.
  for (int port = 0; port < n_ports; ++port) {
    std::vector<ChannelSnapshot> record;
    record.reserve(sc.n_s);
    for (int k = 1; k <= sc.n_s; ++k) {
      ChannelSnapshot snap =
          synthesize_channel(cfg.geom, sc, paths, k * t_slot, port, cfg.mode);
      if (std::isfinite(cfg.obs_snr_db))
        snap = observe(snap, cfg.obs_snr_db,
                       mix_seed(ue_seed ^ (uint64_t(port) << 32) ^ uint64_t(k)));
      record.push_back(std::move(snap));
    }

    const CVec y = record.back().h.col(0);
    const PathEstimate est =
        omp_estimate(y, ctx.omp_dict, cfg.omp_max_paths, cfg.omp_residual_tol);
    if (est.p_hat == 0) {
      out.csi.push_back(record.back());  // degenerate observation: hold last
      continue;
    }

    const TransformMatrix bn = ctx.kind == BaselineKind::wtmp_no_transform
                                   ? identity_transform(cfg.geom.n_elements())
                                   : build_transform(cfg.geom, sc, est);
    PencilConfig pc;
    pc.pencil_size = cfg.pencil_size;
    pc.n_predict = cfg.csi_delay_slots;
    pc.variant = cfg.variant;
    // The record length caps the admissible model order; a greedy estimate
    // richer than the pencil can resolve is truncated to the dominant terms.
    const int max_order = cfg.variant == PencilVariant::difference
                              ? (sc.n_s - 2) / 2
                              : (sc.n_s - 1) / 2;
    const int order = std::max(1, std::min(est.p_hat, max_order));
    out.csi.push_back(
        predict_channel(record, cfg.geom, est, bn, ctx.tf, pc, cfg.gamma1, order));
  }
  return out;
}

/// Mean-over-subcarriers sum spectral efficiency per SNR grid point.
RVec trial_se(const SweepContext& ctx, uint64_t seed) {
  const ExperimentConfig& cfg = ctx.cfg;
  const int n_f = cfg.scenario.n_f;

  std::vector<UeCsi> ues;
  ues.reserve(cfg.n_ues);
  for (int u = 0; u < cfg.n_ues; ++u)
    ues.push_back(make_ue_csi(ctx, mix_seed(seed ^ (uint64_t(u + 1) << 48))));

  RVec se = RVec::Zero(cfg.snr_grid_db.size());
  std::vector<CMat> csi_m(cfg.n_ues), truth_m(cfg.n_ues);
  for (int m = 0; m < n_f; ++m) {
    for (int u = 0; u < cfg.n_ues; ++u) {
      csi_m[u] = port_stack(ues[u].csi, m);
      truth_m[u] = port_stack(ues[u].truth, m);
    }
    const EzfPrecoder ezf = ezf_precode(csi_m);
    for (Eigen::Index s = 0; s < se.size(); ++s)
      se(s) += spectral_efficiency(truth_m, ezf.w, cfg.snr_grid_db(s));
  }
  return se / double(n_f);
}

ExperimentResult make_result(std::string metric, std::string series,
                             std::string axis_name, RVec axis,
                             const ExperimentConfig& cfg) {
  ExperimentResult r;
  r.metric = std::move(metric);
  r.series = std::move(series);
  r.axis_name = std::move(axis_name);
  r.axis = std::move(axis);
  r.samples.setZero(cfg.n_seeds, r.axis.size());
  r.seeds.resize(cfg.n_seeds);
  for (int s = 0; s < cfg.n_seeds; ++s) r.seeds[s] = cfg.seed0 + uint64_t(s);
  return r;
}

}  // namespace

const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::stationary: return "stationary";
    case BaselineKind::no_prediction: return "no_prediction";
    case BaselineKind::wtmp: return "wtmp";
    case BaselineKind::wtmp_no_transform: return "wtmp_no_transform";
    case BaselineKind::wtmp_static_dict: return "wtmp_static_dict";
  }
  throw config_error("baseline_name: unknown kind");
}

BaselineKind baseline_from_name(const std::string& name) {
  for (const BaselineKind k :
       {BaselineKind::stationary, BaselineKind::no_prediction, BaselineKind::wtmp,
        BaselineKind::wtmp_no_transform, BaselineKind::wtmp_static_dict})
    if (name == baseline_name(k)) return k;
  throw config_error("unknown baseline: " + name);
}

void ExperimentResult::finalize() {
  if (samples.cols() != axis.size() || samples.rows() != Eigen::Index(seeds.size()))
    throw config_error("ExperimentResult: sample matrix shape mismatch");
  if (samples.rows() < 1) throw config_error("ExperimentResult: no samples");
  const double n = double(samples.rows());
  mean = samples.colwise().mean();
  stderr_of_mean.resize(axis.size());
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    const double var =
        (samples.col(c).array() - mean(c)).square().sum() / std::max(n - 1.0, 1.0);
    stderr_of_mean(c) = std::sqrt(var / n);
  }
}

void ExperimentConfig::validate() const {
  scenario.validate();
  geom.validate();
  if (n_ues < 1) throw config_error("ExperimentConfig: need at least one UE");
  if (gen.n_ports < 1) throw config_error("ExperimentConfig: need at least one port");
  if (csi_delay_slots < 0) throw config_error("ExperimentConfig: negative CSI delay");
  if (snr_grid_db.size() < 1) throw config_error("ExperimentConfig: empty SNR grid");
  if (n_seeds < 1) throw config_error("ExperimentConfig: need at least one seed");
  if (!(gamma1 > 0.0 && gamma1 <= 1.0))
    throw config_error("ExperimentConfig: gamma1 must lie in (0, 1]");
  if (omp_max_paths < 1 || grid_thetas < 1 || grid_ranges < 1)
    throw config_error("ExperimentConfig: estimation grid knobs must be >= 1");
}

int thread_budget() {
  if (const char* env = std::getenv("WTMP_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

ExperimentResult run_baseline(BaselineKind kind, const ExperimentConfig& cfg) {
  cfg.validate();
  SweepContext ctx(cfg, kind);
  ExperimentResult r = make_result("spectral_efficiency", baseline_name(kind),
                                   "snr_db", cfg.snr_grid_db, cfg);
  parallel_for(cfg.n_seeds, [&](int s) {
    r.samples.row(s) = trial_se(ctx, r.seeds[std::size_t(s)]).transpose();
  });
  r.finalize();
  return r;
}

std::vector<ExperimentResult> figure_se_vs_snr(const ExperimentConfig& cfg,
                                               const std::vector<BaselineKind>& kinds) {
  std::vector<ExperimentResult> out;
  out.reserve(kinds.size());
  for (const BaselineKind k : kinds) out.push_back(run_baseline(k, cfg));
  return out;
}

ExperimentResult figure_error_vs_nt(const ExperimentConfig& cfg,
                                    const std::vector<int>& n_t_values) {
  cfg.validate();
  if (n_t_values.empty()) throw config_error("figure_error_vs_nt: empty axis");
  RVec axis(Eigen::Index(n_t_values.size()));
  for (std::size_t i = 0; i < n_t_values.size(); ++i)
    axis(Eigen::Index(i)) = double(n_t_values[i]);
  ExperimentResult r =
      make_result("prediction_error_db", "wtmp_oracle", "n_t", axis, cfg);

  const ScenarioConfig& sc = cfg.scenario;
  const double t_slot = sc.t_slot_s;
  const double t_tx = (sc.n_s + cfg.csi_delay_slots) * t_slot;

  parallel_for(cfg.n_seeds, [&](int s) {
    const uint64_t seed = r.seeds[std::size_t(s)];
    // One fixed-range scatterer draw per seed, shared across array sizes so
    // the axis sweep isolates the aperture effect.
    const std::vector<PathParams> paths =
        generate_scenario(sc, cfg.gen, mix_seed(seed));
    PathEstimate oracle;
    oracle.p_hat = int(paths.size());
    for (const PathParams& p : paths) {
      oracle.theta.push_back(p.theta);
      oracle.phi.push_back(p.phi);
      oracle.r.push_back(p.r);
    }

    const int max_order = cfg.variant == PencilVariant::difference
                              ? (sc.n_s - 2) / 2
                              : (sc.n_s - 1) / 2;
    const int order = std::max(1, std::min(oracle.p_hat, max_order));
    for (Eigen::Index c = 0; c < axis.size(); ++c) {
      const double pitch = 0.5 * sc.wavelength();
      const ArrayGeometry geom{1, int(axis(c)), pitch, pitch};
      const TfDictionary tf(sc);
      const TransformMatrix bn = build_transform(geom, sc, paths);
      PencilConfig pc;
      pc.pencil_size = cfg.pencil_size;
      pc.n_predict = cfg.csi_delay_slots;
      pc.variant = cfg.variant;

      std::vector<CMat> pred, truth;
      for (int port = 0; port < cfg.gen.n_ports; ++port) {
        std::vector<ChannelSnapshot> record;
        record.reserve(sc.n_s);
        for (int k = 1; k <= sc.n_s; ++k) {
          ChannelSnapshot snap =
              synthesize_channel(geom, sc, paths, k * t_slot, port, cfg.mode);
          if (std::isfinite(cfg.obs_snr_db))
            snap = observe(snap, cfg.obs_snr_db,
                           mix_seed(seed ^ (uint64_t(port + 1) << 40) ^
                                    (uint64_t(c + 1) << 20) ^ uint64_t(k)));
          record.push_back(std::move(snap));
        }
        pred.push_back(
            predict_channel(record, geom, oracle, bn, tf, pc, cfg.gamma1, order).h);
        truth.push_back(synthesize_channel(geom, sc, paths, t_tx, port, cfg.mode).h);
      }
      r.samples(s, c) = prediction_error_db(pred, truth);
    }
  });
  r.finalize();
  return r;
}

std::vector<ExperimentResult> figure_nmse_vs_distance(const ExperimentConfig& cfg,
                                                      const RVec& distances_m) {
  cfg.validate();
  if (distances_m.size() < 1)
    throw config_error("figure_nmse_vs_distance: empty axis");
  ExperimentResult with_bn = make_result("transform_nmse", "with_transform",
                                         "distance_m", distances_m, cfg);
  ExperimentResult without_bn = make_result("transform_nmse", "without_transform",
                                            "distance_m", distances_m, cfg);

  parallel_for(cfg.n_seeds, [&](int s) {
    const uint64_t seed = with_bn.seeds[std::size_t(s)];
    for (Eigen::Index c = 0; c < distances_m.size(); ++c) {
      ScenarioGenParams gen = cfg.gen;
      gen.r_min = gen.r_max = distances_m(c);
      const std::vector<PathParams> paths =
          generate_scenario(cfg.scenario, gen, mix_seed(seed ^ uint64_t(c)));
      const TransformMatrix bn = build_transform(cfg.geom, cfg.scenario, paths);
      const TransformNmse nmse = transform_nmse(
          cfg.geom, cfg.scenario, paths, bn, cfg.mode, cfg.scenario.t_slot_s);
      with_bn.samples(s, c) = nmse.with_bn;
      without_bn.samples(s, c) = nmse.without_bn;
    }
  });
  with_bn.finalize();
  without_bn.finalize();
  return {std::move(with_bn), std::move(without_bn)};
}

std::vector<ExperimentResult> run_figure(int figure_id, const ExperimentConfig& cfg) {
  switch (figure_id) {
    case 2:
      return figure_se_vs_snr(cfg, {BaselineKind::stationary,
                                    BaselineKind::no_prediction, BaselineKind::wtmp});
    case 4:
      return figure_se_vs_snr(
          cfg, {BaselineKind::stationary, BaselineKind::no_prediction,
                BaselineKind::wtmp, BaselineKind::wtmp_no_transform,
                BaselineKind::wtmp_static_dict});
    case 5: {
      ExperimentConfig fast = cfg;
      fast.gen.speed_mps *= 2.0;
      return figure_se_vs_snr(fast, {BaselineKind::stationary,
                                     BaselineKind::no_prediction, BaselineKind::wtmp});
    }
    case 7: {
      ExperimentConfig slow = cfg;
      slow.gen.speed_mps *= 0.25;
      return figure_se_vs_snr(slow, {BaselineKind::stationary,
                                     BaselineKind::no_prediction, BaselineKind::wtmp});
    }
    case 3:
      return {figure_error_vs_nt(cfg, {32, 64, 128, 256})};
    case 6: {
      RVec r(8);
      r << 5, 10, 15, 20, 30, 45, 60, 90;
      return figure_nmse_vs_distance(cfg, r);
    }
    default:
      throw config_error("run_figure: figure id must be one of {2,3,4,5,6,7}");
  }
}

}  // namespace wtmp
