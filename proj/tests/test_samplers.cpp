#include <catch_amalgamated.hpp>

#include <cmath>

#include "catalytic/jump_measure.hpp"
#include "catalytic/quadrature.hpp"
#include "catalytic/stats.hpp"

using namespace catalytic;
using Catch::Approx;

namespace {

double signed_coord(const BoundaryPoint& b) { return b.branch == Axis::U ? b.coord : -b.coord; }

// CDF of nu restricted to region(delta), normalised, on the signed coordinate
// (v-axis points map to -v). Built from the density's antiderivatives
// (2/pi)/(1-u^2) on the u-axis and -(2/pi)/(1+v^2) on the v-axis.
double nu_signed_cdf(double d, double s) {
  const double c = 2.0 / kPi;
  const double mv = c / (1.0 + d * d);
  const double ml = d < 1.0 ? c * (1.0 / (1.0 - (1.0 - d) * (1.0 - d)) - 1.0) : 0.0;
  const double mu = c / ((1.0 + d) * (1.0 + d) - 1.0);
  const double total = mv + ml + mu;
  if (s <= -d) return c / (1.0 + s * s) / total;
  if (s < 0.0) return mv / total;
  if (s <= 1.0 - d) return (mv + c * (1.0 / (1.0 - s * s) - 1.0)) / total;
  if (s < 1.0 + d) return (mv + ml) / total;
  return 1.0 - c / (s * s - 1.0) / total;
}

// Exit density of the quadrant written directly from the closed form.
double exit_density_u(double u, double v, double ub) {
  const double q = ub * ub + v * v - u * u;
  return 4.0 / kPi * u * v * ub / (4.0 * u * u * v * v + q * q);
}
double exit_density_v(double u, double v, double vb) {
  const double q = vb * vb + u * u - v * v;
  return 4.0 / kPi * u * v * vb / (4.0 * u * u * v * v + q * q);
}

}  // namespace

TEST_CASE("inverse-CDF examples") {
  CHECK(nu_v_inverse(0.0, 0.5) == Approx(1.0).epsilon(1e-15));
  CHECK(nu_u_upper_inverse(1.0, 0.5) == Approx(std::sqrt(7.0)).epsilon(1e-15));
  for (double d : {0.1, 0.5, 0.9})
    for (double p : {0.1, 0.5, 0.9}) {
      const double u = nu_u_lower_inverse(d, p);
      const double b = 1.0 - d;
      const double F = (1.0 / (1.0 - u * u) - 1.0) / (1.0 / (1.0 - b * b) - 1.0);
      CHECK(F == Approx(p).epsilon(1e-12));
      CHECK(u <= b);
    }
}

TEST_CASE("sample_nu matches the analytic conditional law") {
  for (double d : {0.1, 0.5, 1.0, 2.0}) {
    RandomStream rng(1234, "sample-nu", static_cast<std::uint64_t>(d * 1000));
    std::vector<double> s(100000);
    for (auto& x : s) {
      const BoundaryPoint b = sample_nu(NuRegion(d), rng);
      if (b.branch == Axis::U) CHECK_FALSE(std::abs(b.coord - 1.0) < d);
      else CHECK(b.coord >= d);
      x = signed_coord(b);
    }
    const KsResult ks = ks_one_sample(s, [d](double x) { return nu_signed_cdf(d, x); });
    INFO("delta = " << d << ", D = " << ks.statistic << ", p = " << ks.p_value);
    CHECK(ks.pass);
  }
  RandomStream rng(1);
  CHECK_THROWS(sample_nu(NuRegion(0.0), rng));
}

TEST_CASE("harmonic exit examples") {
  RandomStream rng(7);
  const BoundaryPoint e = sample_harmonic_exit(3.0, 0.0, rng);
  CHECK(e.branch == Axis::U);
  CHECK(e.coord == 3.0);
  CHECK(harmonic_exit_u_probability(1.0, 1.0) == 0.5);
  const BoundaryPoint q3 = harmonic_exit_from_uniform(1.0, 1.0, 0.75);
  const BoundaryPoint q1 = harmonic_exit_from_uniform(1.0, 1.0, 0.25);
  CHECK(q3.branch == Axis::U);
  CHECK(q3.coord == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(q1.branch == Axis::V);
  CHECK(q1.coord == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS(sample_harmonic_exit(-1.0, 1.0, rng));
}

TEST_CASE("harmonic exit histogram matches the quadrant exit density") {
  const double u = 1.0, v = 2.0;
  const std::vector<double> edges{-INFINITY, -4, -3, -2.5, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 3, INFINITY};
  std::vector<double> probs;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double lo = edges[b], hi = edges[b + 1];
    double p;
    if (hi <= 0.0)
      p = quad::gauss_kronrod([&](double x) { return exit_density_v(u, v, x); }, -hi, std::isinf(lo) ? INFINITY : -lo)
              .value;
    else
      p = quad::gauss_kronrod([&](double x) { return exit_density_u(u, v, x); }, lo, hi).value;
    probs.push_back(p);
  }
  double total = 0.0;
  for (double p : probs) total += p;
  CHECK(total == Approx(1.0).margin(1e-10));

  RandomStream rng(99, "exit-histogram", 0);
  std::vector<double> counts(probs.size(), 0.0);
  for (int i = 0; i < 100000; ++i) {
    const double s = signed_coord(sample_harmonic_exit(u, v, rng));
    std::size_t b = 0;
    while (b + 2 < edges.size() && s >= edges[b + 1]) ++b;
    counts[b] += 1.0;
  }
  const auto chi = chi_square_test(counts, probs);
  INFO("chi2 = " << chi.statistic << ", p = " << chi.p_value);
  CHECK(chi.pass);
}

TEST_CASE("signed exit CDF matches the sampler's inverse") {
  for (double p : {0.05, 0.3, 0.5, 0.8, 0.99}) {
    const double s = signed_coord(harmonic_exit_from_uniform(1.0, 2.0, p));
    CHECK(harmonic_exit_signed_cdf(1.0, 2.0, s) == Approx(p).epsilon(1e-10));
  }
}

TEST_CASE("Brownian exit oracle, small sample") {
  RandomStream rng(5);
  const BoundaryPoint e = bm_exit_oracle(0.0, 2.0, 1e-4, rng);
  CHECK(e.branch == Axis::V);
  CHECK(e.coord == 2.0);
  const int n = 4000;
  int u_hits = 0;
  for (int i = 0; i < n; ++i) u_hits += bm_exit_oracle(1.0, 1.0, 1e-4, rng).branch == Axis::U;
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(u_hits / double(n) - 0.5) <= 3 * se);
}

TEST_CASE("vague limit, small sample") {
  // Stratified uniforms: one draw per stratum of (0,1).
  const double eps = 1e-3;
  const std::size_t n = 200000;
  RandomStream rng(3, "vague-small", 0);
  double v_hits = 0, u_hits = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const BoundaryPoint b = harmonic_exit_from_uniform(1.0, eps, (j + rng.uniform()) / n);
    if (b.branch == Axis::V && b.coord >= 0.5) v_hits += 1;
    if (b.branch == Axis::U && std::abs(b.coord - 1.0) >= 0.5) u_hits += 1;
  }
  const auto m = nu_region_mass(NuRegion(0.5));
  CHECK(v_hits / n / eps == Approx(m.v).epsilon(0.02));
  CHECK(u_hits / n / eps == Approx(m.u()).epsilon(0.02));
}
