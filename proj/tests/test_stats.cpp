#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "catalytic/random.hpp"
#include "catalytic/stats.hpp"

using namespace catalytic;
using Catch::Approx;

TEST_CASE("estimate of a small complex sample") {
  const std::vector<Complex> s{{1.0, 0.0}, {3.0, 2.0}, {2.0, 4.0}, {6.0, 2.0}};
  const auto e = estimate_of(s);
  CHECK(e.n_reps == 4);
  CHECK(e.mean.real() == Approx(3.0));
  CHECK(e.mean.imag() == Approx(2.0));
  // Sample variances 14/3 and 8/3.
  CHECK(e.se_re == Approx(std::sqrt(14.0 / 3.0 / 4.0)));
  CHECK(e.se_im == Approx(std::sqrt(8.0 / 3.0 / 4.0)));
  CHECK(e.std_error == Approx(std::hypot(e.se_re, e.se_im)));
}

TEST_CASE("constant sample has zero error") {
  const auto e = estimate_of(std::vector<double>(10, 0.7));
  CHECK(e.mean.real() == 0.7);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("single replicate has no variance") {
  CHECK_THROWS_AS(estimate_of(std::vector<double>{1.0}), std::domain_error);
}

TEST_CASE("Chan merge matches the two-pass formula") {
  RandomStream rng(1);
  std::vector<double> v;
  for (int i = 0; i < 1001; ++i) v.push_back(1e6 + rng.normal());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const auto e = estimate_of(v);
  CHECK(e.mean.real() == Approx(mean).epsilon(1e-14));
  CHECK(e.se_re == Approx(std::sqrt(ss / 1000.0 / 1001.0)).epsilon(1e-9));
}

TEST_CASE("parallel replicates are scheduling independent") {
  auto fn = [](std::size_t r) {
    RandomStream rng(5, "par", r);
    return Complex(rng.normal(), rng.uniform());
  };
  const auto serial = parallel_replicates(257, fn, 1);
  const auto threaded = parallel_replicates(257, fn, 4);
  CHECK(serial == threaded);
  const auto a = estimate_of(serial), b = estimate_of(threaded);
  CHECK(a.mean == b.mean);
  CHECK(a.se_re == b.se_re);
}

TEST_CASE("parallel replicates rethrow") {
  auto fn = [](std::size_t r) -> double {
    if (r == 7) throw std::runtime_error("rep 7");
    return 0.0;
  };
  CHECK_THROWS_WITH(parallel_replicates(20, fn, 3), "rep 7");
}

TEST_CASE("Kolmogorov distribution values") {
  // Standard table: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
  CHECK(kolmogorov_survival(1.3581) == Approx(0.05).margin(1e-4));
  CHECK(kolmogorov_survival(1.6276) == Approx(0.01).margin(1e-4));
  CHECK(kolmogorov_quantile(0.05) == Approx(1.3581).margin(1e-3));
  CHECK(kolmogorov_survival(0.1) == 1.0);
}

TEST_CASE("KS accepts the right law and rejects a wrong one") {
  RandomStream rng(2, "ks", 0);
  std::vector<double> s;
  for (int i = 0; i < 20000; ++i) s.push_back(rng.uniform());
  CHECK(ks_one_sample(s, [](double x) { return x; }).pass);
  CHECK_FALSE(ks_one_sample(s, [](double x) { return x * x; }).pass);
  std::vector<double> t;
  for (int i = 0; i < 20000; ++i) t.push_back(rng.uniform());
  CHECK(ks_two_sample(s, t).pass);
  for (double& x : t) x = std::sqrt(x);
  CHECK_FALSE(ks_two_sample(s, t).pass);
}

TEST_CASE("chi-square test") {
  const auto r = chi_square_test({50.0, 50.0}, {0.5, 0.5});
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == Approx(1.0));
  // 3.841 is the 95% quantile of chi-square with one degree of freedom.
  const auto q = chi_square_test({59.8, 40.2}, {0.5, 0.5});
  CHECK(q.statistic == Approx(3.8416).margin(1e-3));
  CHECK(q.p_value == Approx(0.05).margin(1e-3));
  CHECK_THROWS_AS(chi_square_test({1.0}, {1.0}), std::invalid_argument);
}
