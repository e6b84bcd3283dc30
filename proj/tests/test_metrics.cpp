#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wtmp/channel.hpp"
#include "wtmp/experiment.hpp"
#include "wtmp/metrics.hpp"
#include "wtmp/transform.hpp"

using namespace wtmp;

namespace {

ArrayGeometry ula(int n) {
  const double d = 0.5 * (kSpeedOfLight / 39e9);
  return {1, n, d, d};
}

CMat random_cmat(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cxd(g(rng), g(rng));
  return m;
}

std::vector<PathParams> single_path(double theta, double r, int n_ports = 1) {
  PathParams p;
  p.theta = theta;
  p.phi = 0.0;
  p.r = r;
  p.tau0 = r / kSpeedOfLight;
  p.omega_hz = 0.0;
  p.gains.assign(n_ports, cxd(1.0, 0.0));
  return {p};
}

/// Paired one-sided comparison: mean(diff) must exceed margin times the
/// standard error of the mean difference.
bool significantly_greater(const RVec& a, const RVec& b, double margin = 2.0) {
  const RVec diff = a - b;
  const double n = double(diff.size());
  const double mean = diff.mean();
  const double var = (diff.array() - mean).square().sum() / (n - 1.0);
  const double se = std::sqrt(var / n);
  return mean > margin * se;
}

bool within_two_se(const ExperimentResult& a, const ExperimentResult& b,
                   Eigen::Index col, double slack = 1e-6) {
  const double gap = std::abs(a.mean(col) - b.mean(col));
  return gap <= 2.0 * (a.stderr_of_mean(col) + b.stderr_of_mean(col)) + slack;
}

ExperimentConfig lite_cfg(int n_t) {
  ExperimentConfig cfg;
  cfg.scenario.n_f = 8;
  cfg.scenario.n_s = 16;
  cfg.geom = ula(n_t);
  cfg.gen.n_clusters = 2;
  cfg.gen.rays_per_cluster = 3;
  cfg.gen.speed_mps = 120.0 / 3.6;
  cfg.n_ues = 2;
  cfg.csi_delay_slots = 16;
  cfg.snr_grid_db = RVec::Constant(1, 20.0);
  cfg.n_seeds = 20;
  cfg.gamma1 = 0.9;
  cfg.grid_thetas = 32;
  cfg.grid_ranges = 4;
  return cfg;
}

}  // namespace

TEST_CASE("prediction error handles exact, zero, and calibrated predictions") {
  const CMat h = random_cmat(8, 4, 11);

  CHECK(prediction_error_db(h, h) == doctest::Approx(-200.0));
  CHECK(prediction_error_db(CMat::Zero(8, 4), h) == doctest::Approx(0.0));

  // Perturbation scaled to exactly 1% relative energy -> -20 dB.
  CMat eps = random_cmat(8, 4, 12);
  eps *= std::sqrt(0.01) * h.norm() / eps.norm();
  CHECK(prediction_error_db(h + eps, h) == doctest::Approx(-20.0).epsilon(1e-9));

  // Mean over pairs: one exact pair and one 1%-off pair -> 0.5% mean ratio.
  const double mixed =
      prediction_error_db(std::vector<CMat>{h, h + eps}, std::vector<CMat>{h, h});
  CHECK(mixed == doctest::Approx(10.0 * std::log10(0.005)).epsilon(1e-9));

  CHECK_THROWS_AS(prediction_error_db(std::vector<CMat>{}, {}), config_error);
  CHECK_THROWS_AS(prediction_error_db(CMat::Zero(3, 3), CMat::Zero(4, 4)),
                  config_error);
  CHECK_THROWS_AS(prediction_error_db(h, CMat::Zero(8, 4)), config_error);
}

TEST_CASE("transform NMSE vanishes in the far-field limit") {
  const ArrayGeometry geom = ula(16);
  ScenarioConfig cfg;
  const auto paths = single_path(1.1, 1e9);
  const TransformMatrix bn = build_transform(geom, cfg, paths);

  const TransformNmse nmse = transform_nmse(geom, cfg, paths, bn);
  CHECK(nmse.with_bn <= 1e-6);
  CHECK(nmse.without_bn <= 1e-6);
}

TEST_CASE("identity transform gives equal NMSE with and without") {
  const ArrayGeometry geom = ula(16);
  ScenarioConfig cfg;
  // 2 m keeps a 16-element aperture inside its Fresnel zone; at 8 m this
  // array is already effectively far-field and the mismatch drops below 1e-3.
  const auto paths = single_path(1.3, 2.0);
  const TransformNmse nmse =
      transform_nmse(geom, cfg, paths, identity_transform(16));
  CHECK(nmse.with_bn == nmse.without_bn);
  CHECK(nmse.without_bn > 1e-3);  // near-field curvature is visible
}

TEST_CASE("oracle transform improves the planar fit on a 256-ULA at 30 m") {
  const ArrayGeometry geom = ula(256);
  ScenarioConfig cfg;
  const auto paths = single_path(std::acos(0.2), 30.0);
  const TransformMatrix bn = build_transform(geom, cfg, paths);

  const TransformNmse nmse = transform_nmse(geom, cfg, paths, bn);
  CHECK(nmse.with_bn < nmse.without_bn);
  CHECK(nmse.with_bn <= 1e-6);  // single path planarizes exactly
}

TEST_CASE("transform NMSE validates its inputs") {
  const TransformMatrix id = identity_transform(4);
  CHECK_THROWS_AS(transform_nmse(CMat::Ones(4, 2), id, CMat::Ones(3, 2)),
                  config_error);
  CHECK_THROWS_AS(transform_nmse(CMat::Ones(4, 2), id, CMat::Zero(4, 2)),
                  config_error);
  CHECK_THROWS_AS(transform_nmse(CMat::Ones(6, 2), id, CMat::Ones(6, 2)),
                  config_error);
}

TEST_CASE("EZF reduces to per-UE matched filters on orthogonal rows") {
  const int n_t = 8;
  std::vector<CMat> ues;
  for (int u = 0; u < 3; ++u) {
    CMat g = CMat::Zero(1, n_t);
    g(0, u) = cxd(2.0, 1.0);  // orthogonal single-entry rows
    ues.push_back(g);
  }
  const EzfPrecoder ezf = ezf_precode(ues);
  CHECK_FALSE(ezf.regularized);
  // The precoder serves the bilinear pairing h_eff.row(u) * w.col(u) (the
  // received-signal product), so the matched direction is conj(h), not h.
  for (int u = 0; u < 3; ++u) {
    const double cosine = std::abs((ezf.h_eff.row(u) * ezf.w.col(u))(0, 0)) /
                          ezf.h_eff.row(u).norm();
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("EZF zero-forces interference on a seeded 4-UE case") {
  std::vector<CMat> ues;
  for (int u = 0; u < 4; ++u) ues.push_back(random_cmat(2, 16, 100 + u));
  const EzfPrecoder ezf = ezf_precode(ues);
  CHECK_FALSE(ezf.regularized);
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v) {
      const double cross = std::abs((ezf.h_eff.row(u) * ezf.w.col(v))(0, 0));
      if (u != v) CHECK(cross < 1e-8);
    }
  for (int v = 0; v < 4; ++v)
    CHECK(ezf.w.col(v).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("EZF single UE is the matched-filter direction") {
  const CMat g = random_cmat(2, 12, 7);
  const EzfPrecoder ezf = ezf_precode({g});
  const double cosine = std::abs((ezf.h_eff.row(0) * ezf.w.col(0))(0, 0)) /
                        ezf.h_eff.row(0).norm();
  CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("EZF regularizes duplicated effective channels") {
  const CMat g = random_cmat(2, 10, 21);
  const EzfPrecoder ezf = ezf_precode({g, g});
  CHECK(ezf.regularized);
  CHECK(ezf.w.allFinite());
}

TEST_CASE("spectral efficiency matches the closed form in simple cases") {
  // Single UE, rho = 1, |h w|^2 = 1 -> exactly 1 bit/s/Hz.
  CMat g = CMat::Zero(1, 4);
  g(0, 0) = 1.0;
  CMat w = CMat::Zero(4, 1);
  w(0, 0) = 1.0;
  CHECK(spectral_efficiency({g}, w, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Orthogonal UEs, perfect CSI: interference-free, SE grows ~log2(rho)/UE.
  std::vector<CMat> ues;
  for (int u = 0; u < 3; ++u) {
    CMat gu = CMat::Zero(1, 8);
    gu(0, u) = 3.0;
    ues.push_back(gu);
  }
  const EzfPrecoder ezf = ezf_precode(ues);
  const double se10 = spectral_efficiency(ues, ezf.w, 10.0);
  const double se20 = spectral_efficiency(ues, ezf.w, 20.0);
  CHECK(se20 - se10 ==
        doctest::Approx(3.0 * std::log2(10.0)).epsilon(0.02));

  CHECK_THROWS_AS(spectral_efficiency({}, w, 0.0), config_error);
  CHECK_THROWS_AS(spectral_efficiency({g}, CMat::Zero(4, 2), 0.0), config_error);
}

TEST_CASE("precoding from current CSI beats outdated CSI over seeds") {
  const int n_seeds = 24;
  RVec se_now(n_seeds), se_old(n_seeds);
  for (int s = 0; s < n_seeds; ++s) {
    std::vector<CMat> truth, outdated;
    for (int u = 0; u < 2; ++u) {
      const CMat g = random_cmat(2, 8, unsigned(1000 + 10 * s + u));
      truth.push_back(g);
      outdated.push_back(g + 0.7 * random_cmat(2, 8, unsigned(5000 + 10 * s + u)));
    }
    se_now(s) = spectral_efficiency(truth, ezf_precode(truth).w, 15.0);
    se_old(s) = spectral_efficiency(truth, ezf_precode(outdated).w, 15.0);
  }
  CHECK(significantly_greater(se_now, se_old));
}

TEST_CASE("baseline names round-trip and reject unknowns") {
  for (const BaselineKind k :
       {BaselineKind::stationary, BaselineKind::no_prediction, BaselineKind::wtmp,
        BaselineKind::wtmp_no_transform, BaselineKind::wtmp_static_dict})
    CHECK(baseline_from_name(baseline_name(k)) == k);
  CHECK_THROWS_AS(baseline_from_name("pad"), config_error);
  CHECK(thread_budget() >= 1);
}

TEST_CASE("experiment results finalize means and reject bad shapes") {
  ExperimentResult r;
  r.metric = "m";
  r.series = "s";
  r.axis_name = "x";
  r.axis = RVec::LinSpaced(3, 0.0, 2.0);
  r.samples.resize(4, 3);
  r.samples << 1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3;
  r.seeds = {1, 2, 3, 4};
  r.finalize();
  CHECK(r.sample_count() == 4);
  CHECK(r.mean(1) == doctest::Approx(2.0));
  CHECK(r.stderr_of_mean(2) == doctest::Approx(0.0));

  ExperimentResult bad = r;
  bad.seeds.pop_back();
  CHECK_THROWS_AS(bad.finalize(), config_error);
}

TEST_CASE("experiment config validation rejects bad knobs") {
  ExperimentConfig cfg = lite_cfg(16);
  cfg.validate();
  ExperimentConfig bad = cfg;
  bad.n_ues = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.gamma1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.snr_grid_db.resize(0);
  CHECK_THROWS_AS(bad.validate(), config_error);
  CHECK_THROWS_AS(run_figure(8, cfg), config_error);
}

TEST_CASE("SE ordering: stationary >= wtmp >= no_prediction under mobility") {
  ExperimentConfig cfg = lite_cfg(32);
  cfg.obs_snr_db = 15.0;  // noisy uplink record separates wtmp from the bound

  const ExperimentResult stat = run_baseline(BaselineKind::stationary, cfg);
  const ExperimentResult wt = run_baseline(BaselineKind::wtmp, cfg);
  const ExperimentResult hold = run_baseline(BaselineKind::no_prediction, cfg);

  REQUIRE(stat.sample_count() == cfg.n_seeds);
  CHECK(significantly_greater(stat.samples.col(0), wt.samples.col(0)));
  CHECK(significantly_greater(wt.samples.col(0), hold.samples.col(0)));
}

TEST_CASE("wavefront transform pays off in the near field") {
  ExperimentConfig cfg = lite_cfg(64);
  // The transform matters once the aperture's quadratic phase sweep spans
  // several angular bins (sub-meter range for this 64-element aperture) AND
  // the record is noisy, so that a spread support costs captured noise. At
  // a few meters the sweep stays inside one bin and both variants tie.
  cfg.gen.r_min = 0.5;
  cfg.gen.r_max = 1.0;
  cfg.grid_thetas = 48;
  cfg.grid_ranges = 8;
  cfg.obs_snr_db = 15.0;
  cfg.n_seeds = 30;

  const ExperimentResult wt = run_baseline(BaselineKind::wtmp, cfg);
  const ExperimentResult flat = run_baseline(BaselineKind::wtmp_no_transform, cfg);
  CHECK(significantly_greater(wt.samples.col(0), flat.samples.col(0)));
}

TEST_CASE("all baselines coincide for zero-velocity UEs") {
  ExperimentConfig cfg = lite_cfg(16);
  cfg.scenario.n_f = 4;
  cfg.scenario.n_s = 6;
  cfg.csi_delay_slots = 4;
  cfg.gen.speed_mps = 0.0;
  cfg.gamma1 = 1.0;  // full support: reconstruction is the exact frame inverse
  cfg.snr_grid_db = RVec::Constant(1, 10.0);

  std::vector<ExperimentResult> res;
  for (const BaselineKind k :
       {BaselineKind::stationary, BaselineKind::no_prediction, BaselineKind::wtmp,
        BaselineKind::wtmp_no_transform, BaselineKind::wtmp_static_dict})
    res.push_back(run_baseline(k, cfg));
  for (std::size_t i = 1; i < res.size(); ++i)
    CHECK(within_two_se(res[0], res[i], 0));
}

TEST_CASE("experiment reruns are bit-for-bit reproducible") {
  ExperimentConfig cfg = lite_cfg(16);
  cfg.scenario.n_f = 4;
  cfg.scenario.n_s = 8;
  cfg.n_seeds = 6;
  cfg.csi_delay_slots = 8;
  const ExperimentResult a = run_baseline(BaselineKind::wtmp, cfg);
  const ExperimentResult b = run_baseline(BaselineKind::wtmp, cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.seeds == b.seeds);
}

TEST_CASE("prediction error vs array size trends downward with aperture") {
  ExperimentConfig cfg = lite_cfg(32);
  cfg.scenario.n_s = 8;
  cfg.csi_delay_slots = 8;
  cfg.n_seeds = 8;
  cfg.gen.n_clusters = 3;
  cfg.gen.rays_per_cluster = 1;
  cfg.gen.r_min = 20.0;
  cfg.gen.r_max = 40.0;
  cfg.gamma1 = 0.99;
  // Noisy observations expose the aperture gain: the signal concentrates in
  // a few angular cells while the noise spreads over all of them, so the
  // captured-noise error shrinks as the array grows.
  cfg.obs_snr_db = 15.0;

  const ExperimentResult r = figure_error_vs_nt(cfg, {32, 64, 128, 256});
  REQUIRE(r.axis.size() == 4);
  CHECK(r.samples.allFinite());
  CHECK(r.mean(3) <= r.mean(0));
}

TEST_CASE("NMSE-vs-distance figure reports both series and near-field gains") {
  ExperimentConfig cfg = lite_cfg(64);
  cfg.n_seeds = 8;
  RVec distances(2);
  distances << 5.0, 200.0;

  const auto res = figure_nmse_vs_distance(cfg, distances);
  REQUIRE(res.size() == 2);
  CHECK(res[0].series == "with_transform");
  CHECK(res[1].series == "without_transform");
  // Near field: the transform closes most of the gap to the planar reference.
  CHECK(significantly_greater(res[1].samples.col(0), res[0].samples.col(0)));
  // Far field: both mismatches are already tiny.
  CHECK(res[1].mean(1) < 1e-3);
}

TEST_CASE("figure dispatch covers the documented ids") {
  ExperimentConfig cfg = lite_cfg(16);
  cfg.scenario.n_f = 4;
  cfg.scenario.n_s = 6;
  cfg.n_seeds = 2;
  cfg.csi_delay_slots = 4;
  cfg.snr_grid_db = RVec::Constant(1, 10.0);

  const auto fig2 = run_figure(2, cfg);
  REQUIRE(fig2.size() == 3);
  CHECK(fig2[0].series == "stationary");
  CHECK(fig2[2].series == "wtmp");

  const auto fig6 = run_figure(6, cfg);
  REQUIRE(fig6.size() == 2);
  for (Eigen::Index i = 1; i < fig6[0].axis.size(); ++i)
    CHECK(fig6[0].axis(i) > fig6[0].axis(i - 1));

  CHECK_THROWS_AS(run_figure(1, cfg), config_error);
}
