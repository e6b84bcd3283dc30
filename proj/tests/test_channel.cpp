#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wtmp/channel.hpp"
#include "wtmp/numerics.hpp"

using namespace wtmp;

namespace {

ScenarioConfig desk_cfg() {
  ScenarioConfig cfg;
  cfg.f_c_hz = 39e9;
  cfg.delta_f_hz = 30e3;
  cfg.n_f = 12;
  cfg.t_slot_s = 0.5e-3;
  cfg.n_s = 25;
  return cfg;
}

ArrayGeometry desk_geom() {
  const double d = 0.5 * (kSpeedOfLight / 39e9);
  return {2, 16, d, d};
}

std::vector<PathParams> three_paths(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<PathParams> paths(3);
  for (auto& p : paths) {
    p.theta = 0.6 + 1.8 * u01(rng);
    p.phi = -1.2 + 2.4 * u01(rng);
    p.r = 4.0 + 8.0 * u01(rng);
    p.tau0 = p.r / kSpeedOfLight;
    p.omega_hz = -400.0 + 800.0 * u01(rng);
    p.gains = {cxd(u01(rng) - 0.5, u01(rng) - 0.5), cxd(u01(rng) - 0.5, u01(rng) - 0.5)};
  }
  return paths;
}

}  // namespace

TEST_CASE("scenario config defaults center the band on the carrier") {
  auto cfg = desk_cfg();
  CHECK(cfg.bandwidth() == doctest::Approx(360e3));
  CHECK(cfg.f1_hz() == doctest::Approx(39e9 - 180e3));
  CHECK(cfg.subcarrier_hz(0) == doctest::Approx(cfg.f1_hz()));
  CHECK(cfg.subcarrier_hz(11) == doctest::Approx(cfg.f1_hz() + 11 * 30e3));
  ScenarioConfig bad = cfg;
  bad.n_f = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("delay-doppler vector phases") {
  auto cfg = desk_cfg();
  CVec b0 = delay_doppler_vector(cfg, 0.0, 0.0, 1.0);
  CHECK((b0 - CVec::Ones(cfg.n_f)).norm() <= 1e-14);

  const double tau0 = 87e-9, omega = 250.0, t = 3 * cfg.t_slot_s;
  CVec b = delay_doppler_vector(cfg, tau0, omega, t);
  for (int m = 0; m < cfg.n_f; ++m) {
    CHECK(std::abs(std::abs(b(m)) - 1.0) <= 1e-14);
    const double fm = cfg.subcarrier_hz(m);
    const cxd want =
        std::polar(1.0, 2.0 * kPi * ((1.0 + fm / cfg.f_c_hz) * omega * t - fm * tau0));
    CHECK(std::abs(b(m) - want) <= 1e-13);
  }
}

TEST_CASE("delay-doppler vector equals the moving-delay model") {
  // b is the product of the carrier Doppler phase and the phase of the
  // time-varying delay tau(t) = tau0 - omega t / f_c at each subcarrier.
  auto cfg = desk_cfg();
  const double tau0 = 120e-9, omega = -333.0, t = 7 * cfg.t_slot_s;
  CVec b = delay_doppler_vector(cfg, tau0, omega, t);
  const double tau_t = tau0 - omega * t / cfg.f_c_hz;
  for (int m = 0; m < cfg.n_f; ++m) {
    const double fm = cfg.subcarrier_hz(m);
    const cxd want = std::polar(1.0, 2.0 * kPi * (omega * t - fm * tau_t));
    // The two groupings of the same phase differ by rounding amplified by the
    // ~3e4-radian delay argument.
    CHECK(std::abs(b(m) - want) <= 1e-9);
  }
}

TEST_CASE("synthesized channel matches the vectorized Kronecker construction") {
  auto cfg = desk_cfg();
  auto geom = desk_geom();
  auto paths = three_paths(101);
  for (int port = 0; port < 2; ++port) {
    const double t = 2 * cfg.t_slot_s;
    ChannelSnapshot snap = synthesize_channel(geom, cfg, paths, t, port);
    REQUIRE(snap.h.rows() == geom.n_elements());
    REQUIRE(snap.h.cols() == cfg.n_f);

    CVec hvec = CVec::Zero(geom.n_elements() * cfg.n_f);
    for (const auto& p : paths) {
      CVec a = near_steering(geom, cfg.wavelength(), p.theta, p.phi, p.r);
      CVec b = delay_doppler_vector(cfg, p.tau0, p.omega_hz, t);
      hvec += p.gains[port] * kron(b, a);
    }
    CMat hmat = Eigen::Map<CMat>(hvec.data(), geom.n_elements(), cfg.n_f);
    CHECK((snap.h - hmat).norm() <= 1e-10 * std::max(1.0, hmat.norm()));
  }
}

TEST_CASE("channel synthesis is linear in path gains") {
  auto cfg = desk_cfg();
  auto geom = desk_geom();
  auto paths = three_paths(55);
  ChannelSnapshot all = synthesize_channel(geom, cfg, paths, 1e-3);
  CMat sum = CMat::Zero(geom.n_elements(), cfg.n_f);
  for (const auto& p : paths)
    sum += synthesize_channel(geom, cfg, {p}, 1e-3).h;
  CHECK((all.h - sum).norm() <= 1e-11 * std::max(1.0, sum.norm()));

  CHECK(synthesize_channel(geom, cfg, {}, 0.0).h.norm() == 0.0);
}

TEST_CASE("range warning raised for scatterers inside the aperture") {
  auto cfg = desk_cfg();
  auto geom = desk_geom();
  auto paths = three_paths(56);
  paths[1].r = 0.25 * geom.aperture_v();
  CHECK(synthesize_channel(geom, cfg, paths, 0.0).range_warning);
  CHECK_FALSE(synthesize_channel(geom, cfg, three_paths(56), 0.0).range_warning);
}

TEST_CASE("observe hits the requested per-entry SNR and is seed-deterministic") {
  auto cfg = desk_cfg();
  cfg.n_f = 64;
  ArrayGeometry geom{2, 128, desk_geom().d_h, desk_geom().d_v};
  auto paths = three_paths(77);
  ChannelSnapshot clean = synthesize_channel(geom, cfg, paths, 0.0);
  REQUIRE(clean.h.size() >= 10000);

  const double snr_db = 10.0;
  ChannelSnapshot noisy = observe(clean, snr_db, 4242);
  const double signal = clean.h.squaredNorm();
  const double noise = (noisy.h - clean.h).squaredNorm();
  const double snr_emp = 10.0 * std::log10(signal / noise);
  CHECK(std::abs(snr_emp - snr_db) <= 0.22);  // 5% of the linear ratio

  ChannelSnapshot again = observe(clean, snr_db, 4242);
  CHECK((again.h - noisy.h).norm() == 0.0);
  ChannelSnapshot other = observe(clean, snr_db, 4243);
  CHECK((other.h - noisy.h).norm() > 0.0);
}

TEST_CASE("generate_scenario honors counts, band, normalization, determinism") {
  auto cfg = desk_cfg();
  ScenarioGenParams gp;
  gp.n_clusters = 9;
  gp.rays_per_cluster = 20;
  gp.r_min = 30.0;
  gp.r_max = 45.0;
  gp.speed_mps = 30.0;
  gp.n_ports = 2;
  auto paths = generate_scenario(cfg, gp, 2024);
  REQUIRE(paths.size() == 180);

  double p0 = 0.0, p1 = 0.0;
  const double omega_max = gp.speed_mps / cfg.wavelength();
  for (const auto& p : paths) {
    CHECK(p.r >= gp.r_min);
    CHECK(p.r <= gp.r_max);
    CHECK(p.tau0 == doctest::Approx(p.r / kSpeedOfLight));
    CHECK(std::abs(p.omega_hz) <= omega_max + 1e-9);
    CHECK(p.theta > 0.0);
    CHECK(p.theta < kPi);
    p0 += std::norm(p.gains[0]);
    p1 += std::norm(p.gains[1]);
  }
  CHECK(p0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p1 == doctest::Approx(1.0).epsilon(1e-12));

  auto paths2 = generate_scenario(cfg, gp, 2024);
  REQUIRE(paths2.size() == paths.size());
  for (size_t i = 0; i < paths.size(); ++i) {
    CHECK(paths[i].theta == paths2[i].theta);
    CHECK(paths[i].gains[0] == paths2[i].gains[0]);
  }
  auto paths3 = generate_scenario(cfg, gp, 2025);
  CHECK(paths3[0].theta != paths[0].theta);

  ScenarioGenParams bad = gp;
  bad.r_min = -1.0;
  CHECK_THROWS_AS(generate_scenario(cfg, bad, 1), config_error);
}
