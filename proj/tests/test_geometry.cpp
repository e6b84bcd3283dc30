#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wtmp/geometry.hpp"
#include "wtmp/numerics.hpp"
#include "wtmp/steering.hpp"

using namespace wtmp;

namespace {

constexpr double kFc = 39e9;
const double kLambda = kSpeedOfLight / kFc;

ArrayGeometry upa(int nh, int nv, double dh, double dv) { return {nh, nv, dh, dv}; }

}  // namespace

TEST_CASE("rx_unit_vector is unit norm and hits the axes") {
  Vec3 u = rx_unit_vector(kPi / 2, 0.0);
  CHECK(std::abs(u(0) - 1.0) <= 1e-15);
  CHECK(std::abs(u(1)) <= 1e-15);
  CHECK(std::abs(u(2)) <= 1e-15);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(-kPi, kPi);
  for (int i = 0; i < 50; ++i) {
    CHECK(rx_unit_vector(th(rng), ph(rng)).norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("element_position centering and formula values") {
  const double d = 0.5 * kLambda;
  auto geom = upa(2, 4, d, d);
  // The reference element (n_h/2, n_v/2) sits at the origin.
  CHECK(element_position(geom, 1, 2).norm() <= 1e-18);
  // On a 4x4 array the first column is half a wavelength off-axis.
  auto g44 = upa(4, 4, d, d);
  Vec3 p = element_position(g44, 1, 2);
  CHECK(p(0) == 0.0);
  CHECK(p(1) == doctest::Approx(-d).epsilon(1e-14));
  CHECK(p(2) == 0.0);
  CHECK_THROWS_AS(element_position(geom, 0, 1), config_error);
  CHECK_THROWS_AS(element_position(geom, 1, 5), config_error);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(upa(3, 4, 0.1, 0.1).validate(), config_error);
  CHECK_THROWS_AS(upa(2, 4, 0.0, 0.1).validate(), config_error);
  CHECK_NOTHROW(upa(1, 64, 0.1, 0.1).validate());
  CHECK_NOTHROW(upa(2, 4, 0.1, 0.1).validate());
}

TEST_CASE("exact_distance equals the Euclidean scatterer-element distance") {
  auto geom = upa(2, 8, 0.5 * kLambda, 0.5 * kLambda);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> th(0.1, kPi - 0.1), ph(-1.5, 1.5),
      rr(0.5, 60.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = th(rng), phi = ph(rng), r = rr(rng);
    const Vec3 scat = r * rx_unit_vector(theta, phi);
    const int sh = 1 + int(rng() % 2), sv = 1 + int(rng() % 8);
    const double want = (scat - element_position(geom, sh, sv)).norm();
    const double got = exact_distance(geom, r, theta, phi, sh, sv);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, want));
  }
}

TEST_CASE("phase discrepancies match their defining distance differences") {
  auto geom = upa(2, 16, 0.5 * kLambda, 0.5 * kLambda);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> th(0.1, kPi - 0.1), ph(-1.5, 1.5),
      rr(2.0, 100.0);
  const double wave = 2.0 * kPi / kLambda;
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = th(rng), phi = ph(rng), r = rr(rng);
    const int sh = 1 + int(rng() % 2), sv = 1 + int(rng() % 16);
    const double dnear = wave * std::abs(third_order_distance(geom, r, theta, phi, sh, sv) -
                                         fresnel_distance(geom, r, theta, phi, sh, sv));
    CHECK(std::abs(dnear - near_field_phase_discrepancy(geom, kLambda, r, theta, phi,
                                                        sh, sv)) <= 1e-9);
    const double dfar = wave * std::abs(fresnel_distance(geom, r, theta, phi, sh, sv) -
                                        far_distance(geom, r, theta, phi, sh, sv));
    CHECK(std::abs(dfar - far_field_phase_discrepancy(geom, kLambda, r, theta, phi, sh,
                                                      sv)) <= 1e-9);
  }
}

TEST_CASE("inside the region the quadratic model beats the planar model") {
  auto geom = upa(2, 64, 0.5 * kLambda, 0.5 * kLambda);
  auto region = approximation_region(geom, kLambda);
  REQUIRE(region.lo < region.hi);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> th(0.05, kPi - 0.05), ph(-1.5, 1.5),
      rr(region.lo, region.hi);
  for (int trial = 0; trial < 500; ++trial) {
    const double theta = th(rng), phi = ph(rng), r = rr(rng);
    const int sh = 1 + int(rng() % 2), sv = 1 + int(rng() % 64);
    const double ex = exact_distance(geom, r, theta, phi, sh, sv);
    const double fr = std::abs(ex - fresnel_distance(geom, r, theta, phi, sh, sv));
    const double fa = std::abs(ex - far_distance(geom, r, theta, phi, sh, sv));
    CHECK(fr <= fa + 1e-15);
  }
}

TEST_CASE("approximation region of the 2x256 half-wavelength array") {
  auto geom = upa(2, 256, 0.5 * kLambda, 0.5 * kLambda);
  auto region = approximation_region(geom, kLambda);
  // Frozen reference values for this array at 39 GHz.
  CHECK(region.lo == doctest::Approx(6.90).epsilon(0.02));
  CHECK(region.hi == doctest::Approx(252.0).epsilon(0.02));

  // Independent oracle: coarse scan of xi with plain loops.
  const double dh = geom.aperture_h(), dv = geom.aperture_v();
  double xi_max = 0.0;
  for (int i = 0; i <= 2000000; ++i) {
    const double t = kPi * double(i) / 2000000.0;
    const double first = std::sin(t) * dh + std::cos(t) * dv;
    const double second = std::cos(t) * dh - std::sin(t) * dv;
    xi_max = std::max(xi_max, first * second * second);
  }
  CHECK(region.lo == doctest::Approx(std::sqrt(xi_max / kLambda)).epsilon(1e-6));
  CHECK(region.hi == doctest::Approx(2.0 * (dh * dh + dv * dv) / kLambda).epsilon(1e-12));
}

TEST_CASE("approximation region collapses gracefully for tiny arrays") {
  auto geom = upa(1, 1, 0.5 * kLambda, 0.5 * kLambda);
  auto region = approximation_region(geom, kLambda);
  CHECK(region.hi <= 4.0 * kLambda);
  CHECK(region.lo >= 0.0);
  CHECK(region.lo >= region.hi * 0.0);  // both finite, no throw
}

TEST_CASE("model-range helper flags scatterers inside the aperture") {
  auto geom = upa(2, 64, 0.5 * kLambda, 0.5 * kLambda);
  CHECK_FALSE(distance_in_model_range(geom, 0.5 * geom.aperture_v()));
  CHECK(distance_in_model_range(geom, 10.0));
}

TEST_CASE("far steering has unit-modulus entries and Kronecker structure") {
  auto geom = upa(4, 8, 0.5 * kLambda, 0.4 * kLambda);
  const double theta = 1.1, phi = -0.4;
  CVec a = far_steering(geom, kLambda, theta, phi);
  REQUIRE(a.size() == 32);
  CHECK(a.norm() == doctest::Approx(std::sqrt(32.0)).epsilon(1e-13));
  for (Eigen::Index i = 0; i < a.size(); ++i)
    CHECK(std::abs(std::abs(a(i)) - 1.0) <= 1e-14);

  auto geom_h = upa(4, 1, 0.5 * kLambda, 0.4 * kLambda);
  auto geom_v = upa(1, 8, 0.5 * kLambda, 0.4 * kLambda);
  // Degenerate-axis steering picks up only the matching phase gradient.
  CVec ah(4), av(8);
  const double wave = 2.0 * kPi / kLambda;
  for (int k = 0; k < 4; ++k)
    ah(k) = std::polar(1.0, wave * std::sin(theta) * std::sin(phi) * geom.d_h * k);
  for (int k = 0; k < 8; ++k)
    av(k) = std::polar(1.0, wave * std::cos(theta) * geom.d_v * k);
  CHECK((a - kron(ah, av)).norm() <= 1e-12);
}

TEST_CASE("distance response phase reference and far limit") {
  auto geom = upa(2, 16, 0.5 * kLambda, 0.5 * kLambda);
  const double theta = 0.9, phi = 0.3;
  CVec dr = distance_response(geom, kLambda, theta, phi, 8.0);
  // Reference element (s_h = 1, s_v = 8) -> k_h = 0, k_v = 7.
  CHECK(std::abs(dr(element_index(geom, 0, 7)) - cxd(1, 0)) <= 1e-14);
  for (Eigen::Index i = 0; i < dr.size(); ++i)
    CHECK(std::abs(std::abs(dr(i)) - 1.0) <= 1e-14);

  CVec near = near_steering(geom, kLambda, theta, phi, 1e9);
  CVec far = far_steering(geom, kLambda, theta, phi);
  for (Eigen::Index i = 0; i < near.size(); ++i)
    CHECK(std::abs(near(i) - far(i)) <= 1e-6);

  CVec planar = distance_response(geom, kLambda, theta, phi, 8.0, WavefrontMode::planar);
  CHECK((planar - CVec::Ones(32)).norm() <= 1e-15);
}

TEST_CASE("exact-mode response converges to the quadratic response with range") {
  auto geom = upa(2, 32, 0.5 * kLambda, 0.5 * kLambda);
  const double theta = 1.3, phi = -0.7;
  auto region = approximation_region(geom, kLambda);
  const double r = region.hi;
  CVec fres = near_steering(geom, kLambda, theta, phi, r, WavefrontMode::fresnel);
  CVec exact = near_steering(geom, kLambda, theta, phi, r, WavefrontMode::exact);
  // At the far edge of the region the two wavefront models agree closely.
  CHECK((fres - exact).cwiseAbs().maxCoeff() <= 1e-2);
}
