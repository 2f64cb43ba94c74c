#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "catalytic/migration.hpp"

using namespace catalytic;
using Catch::Approx;

namespace {

MigrationMatrix two_site() { return MigrationMatrix(2, {-1, 1, 1, -1}); }

MigrationMatrix random_kernel(std::mt19937_64& g, std::size_t n, bool symmetric) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      if (k != l && (!symmetric || l > k)) {
        const double v = u(g) < 0.5 ? u(g) : 0.0;
        a[k * n + l] = v;
        if (symmetric) a[l * n + k] = v;
      }
  for (std::size_t k = 0; k < n; ++k) a[k * n + k] = -2.0 * u(g);
  return MigrationMatrix(n, a);
}

Eigen::MatrixXd to_eigen(const MigrationMatrix& A) {
  Eigen::MatrixXd m(A.size(), A.size());
  for (std::size_t k = 0; k < A.size(); ++k)
    for (std::size_t l = 0; l < A.size(); ++l) m(k, l) = A(k, l);
  return m;
}

// e^{tA} f through a full eigendecomposition.
std::vector<double> eigen_expm(const MigrationMatrix& A, double t, const std::vector<double>& f) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(A));
  const Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::VectorXcd lam = es.eigenvalues();
  Eigen::VectorXcd ef(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) ef(k) = f[k];
  Eigen::VectorXcd c = V.partialPivLu().solve(ef);
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::exp(lam(j) * t);
  const Eigen::VectorXcd r = V * c;
  std::vector<double> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = r(k).real();
  return out;
}

std::vector<double> random_vector(std::mt19937_64& g, std::size_t n, bool nonneg) {
  std::uniform_real_distribution<double> u(nonneg ? 0.0 : -1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

}  // namespace

TEST_CASE("matrix validation and norm") {
  CHECK_NOTHROW(validate_matrix(two_site()));
  CHECK(two_site().norm() == 4.0);
  CHECK(MigrationMatrix::zero(3).norm() == 0.0);
  CHECK_NOTHROW(validate_matrix(MigrationMatrix::zero(3)));
  try {
    validate_matrix(MigrationMatrix(2, {0, -1, 0, 0}));
    FAIL("expected a validation error");
  } catch (const MatrixValidationError& e) {
    CHECK(e.row == 0);
    CHECK(e.col == 1);
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
  CHECK_THROWS(MigrationMatrix(2, {1, 2, 3}));
}

TEST_CASE("Liggett-Spitzer weights") {
  SECTION("zero kernel") {
    const BetaWeights w = find_beta(MigrationMatrix::zero(4));
    CHECK(w.M == 1.0);
    for (double b : w.beta) CHECK(b == 0.25);
  }
  SECTION("two-site symmetric kernel") {
    const auto A = two_site();
    const BetaWeights w = find_beta(A);
    CHECK(w.beta[0] == Approx(w.beta[1]).epsilon(1e-15));
    // B has all entries 2, so B beta = 4 beta and (1.5) holds already with M = 4.
    for (std::size_t k = 0; k < 2; ++k) {
      const double Bb = 2.0 * (w.beta[0] + w.beta[1]);
      CHECK(Bb == Approx(4.0 * w.beta[k]).epsilon(1e-14));
    }
    CHECK(verify_beta(A, w));
    CHECK(verify_beta(A, BetaWeights{w.beta, 4.0}));
  }
  SECTION("random kernels pass the verification sweep") {
    std::mt19937_64 g(3);
    for (int rep = 0; rep < 100; ++rep) {
      const auto A = random_kernel(g, 2 + g() % 8, rep % 2);
      const BetaWeights w = find_beta(A);
      CHECK(w.M >= 1.0);
      CHECK(verify_beta(A, w));
    }
  }
  SECTION("verification rejects bad weights") {
    const auto A = two_site();
    CHECK_FALSE(verify_beta(A, BetaWeights{{1.0, 1.0}, 3.9}));
    CHECK_FALSE(verify_beta(A, BetaWeights{{1.0, 0.0}, 10.0}));
  }
}

TEST_CASE("semigroup examples") {
  const auto A = two_site();
  CHECK(semigroup_apply(A, 0.0, {0.3, 0.7}) == std::vector<double>{0.3, 0.7});
  CHECK(semigroup_apply(MigrationMatrix::zero(2), 5.0, {0.3, 0.7}) == std::vector<double>{0.3, 0.7});
  for (double t : {0.01, 0.5, 1.0, 3.0, 10.0}) {
    const auto r = semigroup_apply(A, t, {1.0, 0.0});
    const double e = std::exp(-2.0 * t);
    CHECK(r[0] == Approx((1 + e) / 2).epsilon(1e-12));
    CHECK(r[1] == Approx((1 - e) / 2).epsilon(1e-12));
    const auto b = bold_apply(A, t, {1.0, 0.0});
    CHECK(b[0] == Approx(std::exp(t) * std::cosh(t)).epsilon(1e-12));
    CHECK(b[1] == Approx(std::exp(t) * std::sinh(t)).epsilon(1e-12));
  }
  CHECK(bold_apply(A, 0.0, {0.2, 0.4}) == std::vector<double>{0.2, 0.4});
}

TEST_CASE("semigroup agrees with an eigendecomposition") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + g() % 6;
    const auto A = random_kernel(g, n, rep % 2 == 0);
    const auto f = random_vector(g, n, true);
    const double t = std::uniform_real_distribution<double>(0.0, 2.0)(g);
    const auto ours = semigroup_apply(A, t, f);
    const auto ref = eigen_expm(A, t, f);
    double scale = 0.0;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(ours[k] - ref[k]) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("bold semigroup equals the plain one for nonnegative kernels") {
  MigrationMatrix A(3, {0.5, 1, 0, 0.2, 0, 0.3, 1, 1, 0.1});
  const auto a = semigroup_apply(A, 0.7, {1, 2, 3});
  const auto b = bold_apply(A, 0.7, {1, 2, 3});
  for (int k = 0; k < 3; ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("semigroup properties on random kernels") {
  std::mt19937_64 g(19);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + g() % 6;
    const auto A = random_kernel(g, n, false);
    const auto f = random_vector(g, n, rep % 2 == 0);
    const auto fpos = random_vector(g, n, true);
    std::uniform_real_distribution<double> ut(0.0, 1.5);
    const double s = ut(g), t = ut(g);

    const auto st = semigroup_apply(A, s, semigroup_apply(A, t, f));
    const auto direct = semigroup_apply(A, s + t, f);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(st[k] - direct[k]) <= 1e-10 * std::max(1.0, std::abs(direct[k])));

    const BetaWeights w = find_beta(A);
    const auto bf = bold_apply(A, t, fpos);
    const auto pf = semigroup_apply(A, t, fpos);
    const double bound = std::exp(w.M * t) * beta_norm(fpos, w.beta);
    CHECK(beta_norm(bf, w.beta) <= bound * (1 + 1e-12));
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(bf[k] <= bound / w.beta[k] * (1 + 1e-12));
      CHECK(fpos[k] <= bf[k] * (1 + 1e-12));
      CHECK(pf[k] <= bf[k] * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("drift") {
  const auto A = two_site();
  CHECK(drift_apply(A, Config(2, true), 1) == std::vector<double>{0, 0});
  CHECK(drift_apply(A, Config({{2, 0}, {0, 0}}, true), 1) == std::vector<double>{-2, 2});
  CHECK(drift_apply(MigrationMatrix(1, {0.0}), Config({{3, 0}}, true), 1) == std::vector<double>{0});
  CHECK_THROWS(drift_apply(A, Config(2, true), 3));
}

TEST_CASE("kernel generators and parsers") {
  CHECK(cycle_kernel(2).entries() == two_site().entries());
  const auto c5 = cycle_kernel(5, 0.7);
  for (std::size_t k = 0; k < 5; ++k) {
    double row = 0.0;
    for (std::size_t l = 0; l < 5; ++l) row += c5(k, l);
    CHECK(row == Approx(0.0).margin(1e-15));
    CHECK(c5(k, (k + 1) % 5) == 0.7);
  }
  CHECK(matrix_from_csv("-1,1\n1,-1\n").entries() == two_site().entries());
  CHECK_THROWS(matrix_from_csv("-1,1\n1\n"));
  CHECK(matrix_from_json("[[0,0,-1],[0,1,1],[1,0,1],[1,1,-1]]").entries() == two_site().entries());
  const auto j = matrix_from_json("{\"size\":3,\"entries\":[[0,1,0.5]]}");
  CHECK(j.size() == 3);
  CHECK(j(0, 1) == 0.5);
  CHECK(matrix_from_json("[[0,1,2]]", 4).size() == 4);
}
