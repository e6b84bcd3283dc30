#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "wtmp/numerics.hpp"

using namespace wtmp;

namespace {

CMat random_complex(Eigen::Index rows, Eigen::Index cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cxd(g(rng), g(rng));
  return m;
}

}  // namespace

TEST_CASE("svd reconstructs the input and orders singular values") {
  for (auto [r, c, seed] : std::vector<std::tuple<int, int, uint64_t>>{
           {4, 4, 11}, {7, 3, 12}, {3, 9, 13}, {64, 48, 14}, {48, 64, 15}}) {
    CMat m = random_complex(r, c, seed);
    auto dec = svd(m);
    CMat rec = dec.U * dec.S.cast<cxd>().asDiagonal() * dec.Vh;
    CHECK((rec - m).norm() <= 1e-10 * std::max(1.0, m.norm()));
    for (Eigen::Index i = 0; i + 1 < dec.S.size(); ++i) CHECK(dec.S(i) >= dec.S(i + 1));
    CHECK(dec.S.minCoeff() >= 0.0);
    // Thin factors have orthonormal columns.
    Eigen::Index k = std::min<Eigen::Index>(r, c);
    CHECK((dec.U.adjoint() * dec.U - CMat::Identity(k, k)).norm() <= 1e-10);
    CHECK((dec.Vh * dec.Vh.adjoint() - CMat::Identity(k, k)).norm() <= 1e-10);
  }
}

TEST_CASE("eig_general eigenvalues satisfy the rank-deficiency residual") {
  for (auto [n, seed] : std::vector<std::pair<int, uint64_t>>{{2, 21}, {5, 22}, {12, 23}}) {
    CMat m = random_complex(n, n, seed);
    CVec lam = eig_general(m);
    REQUIRE(lam.size() == n);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      CMat shifted = m - lam(i) * CMat::Identity(n, n);
      auto dec = svd(shifted);
      CHECK(dec.S(dec.S.size() - 1) <= 1e-8 * m.norm());
    }
  }
}

TEST_CASE("eig_general on the rotation generator gives +-i") {
  CMat m(2, 2);
  m << cxd(0, 0), cxd(1, 0), cxd(-1, 0), cxd(0, 0);
  CVec lam = eig_general(m);
  std::vector<cxd> got{lam(0), lam(1)};
  std::sort(got.begin(), got.end(),
            [](cxd a, cxd b) { return a.imag() < b.imag(); });
  CHECK(std::abs(got[0] - cxd(0, -1)) <= 1e-12);
  CHECK(std::abs(got[1] - cxd(0, 1)) <= 1e-12);
}

TEST_CASE("eigenvalue magnitudes of a normal matrix match its singular values") {
  // Build a normal matrix: unitary conjugation of a diagonal.
  CMat q = svd(random_complex(8, 8, 31)).U;
  CVec d = random_complex(8, 1, 32).col(0);
  CMat m = q * d.asDiagonal() * q.adjoint();
  CVec lam = eig_general(m);
  std::vector<double> mags(8);
  for (int i = 0; i < 8; ++i) mags[i] = std::abs(lam(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  auto dec = svd(m);
  for (int i = 0; i < 8; ++i) CHECK(mags[i] == doctest::Approx(dec.S(i)).epsilon(1e-8));
}

TEST_CASE("pinv satisfies the four Penrose properties") {
  for (auto [r, c, seed] : std::vector<std::tuple<int, int, uint64_t>>{
           {5, 5, 41}, {8, 3, 42}, {3, 8, 43}}) {
    CMat a = random_complex(r, c, seed);
    CMat p = pinv(a);
    CHECK((a * p * a - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
    CHECK((p * a * p - p).norm() <= 1e-9 * std::max(1.0, p.norm()));
    CHECK(((a * p).adjoint() - a * p).norm() <= 1e-9);
    CHECK(((p * a).adjoint() - p * a).norm() <= 1e-9);
  }
}

TEST_CASE("pinv of rank-deficient and degenerate inputs") {
  // Rank-1 outer product: pinv known in closed form.
  CVec u = random_complex(6, 1, 51).col(0);
  CVec v = random_complex(4, 1, 52).col(0);
  CMat a = u * v.adjoint();
  CMat p = pinv(a);
  CMat expect = v * u.adjoint() / (u.squaredNorm() * v.squaredNorm());
  CHECK((p - expect).norm() <= 1e-10);

  CMat z = CMat::Zero(3, 5);
  CHECK(pinv(z).norm() == 0.0);
}

TEST_CASE("pinv of stacked identities is the averaging map") {
  // Oracle: for A = [I; I; ...; I] (P copies of I_n), A^H A = P I, so
  // pinv(A) = (1/P) [I I ... I].
  const int n = 3, P = 4;
  CMat a = CMat::Zero(n * P, n);
  for (int k = 0; k < P; ++k) a.block(k * n, 0, n, n) = CMat::Identity(n, n);
  CMat p = pinv(a);
  REQUIRE(p.rows() == n);
  REQUIRE(p.cols() == n * P);
  for (int k = 0; k < P; ++k)
    CHECK((p.block(0, k * n, n, n) - CMat::Identity(n, n) / double(P)).norm() <= 1e-12);
}

TEST_CASE("dft_matrix closed form and unitarity") {
  CMat w2 = dft_matrix(2);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(w2(0, 0) - cxd(s, 0)) <= 1e-15);
  CHECK(std::abs(w2(0, 1) - cxd(s, 0)) <= 1e-15);
  CHECK(std::abs(w2(1, 0) - cxd(s, 0)) <= 1e-15);
  CHECK(std::abs(w2(1, 1) - cxd(-s, 0)) <= 1e-15);

  for (int n : {1, 3, 12, 64, 257}) {
    CMat w = dft_matrix(n);
    CHECK((w.adjoint() * w - CMat::Identity(n, n)).norm() <= 1e-12);
  }
}

TEST_CASE("kron shape, entries, and mixed-product property") {
  CMat a = random_complex(2, 3, 61);
  CMat b = random_complex(3, 2, 62);
  CMat k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 6);
  CHECK(std::abs(k(1, 1) - a(0, 0) * b(1, 1)) <= 1e-15);
  CHECK(std::abs(k(4, 3) - a(1, 1) * b(1, 1)) <= 1e-15);

  CMat c = random_complex(3, 4, 63);
  CMat d = random_complex(2, 5, 64);
  CMat lhs = kron(a, b) * kron(c, d);
  CMat rhs = kron(CMat(a * c), CMat(b * d));
  CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
}

TEST_CASE("kernels are scalar-generic (float instantiation)") {
  using CMatf = CMatrix<float>;
  CMatf m(2, 2);
  m << Complex<float>(1, 0), Complex<float>(0, 2), Complex<float>(0, -2),
      Complex<float>(1, 0);
  auto dec = svd(m);
  CMatf rec = dec.U * dec.S.cast<Complex<float>>().asDiagonal() * dec.Vh;
  CHECK((rec - m).norm() <= 1e-5f);
  CHECK(eig_general(m).size() == 2);
  CHECK((dft_matrix<float>(4).adjoint() * dft_matrix<float>(4) -
         CMatf::Identity(4, 4))
            .norm() <= 1e-5f);
}

TEST_CASE("shape preconditions are rejected") {
  CHECK_THROWS_AS(dft_matrix(0), config_error);
  CHECK_THROWS_AS(eig_general(CMat::Zero(2, 3)), config_error);
  CHECK_THROWS_AS(svd(CMat(0, 0)), config_error);
}
