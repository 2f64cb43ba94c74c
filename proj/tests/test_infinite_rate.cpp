#include <catch_amalgamated.hpp>

#include <cmath>

#include "catalytic/infinite_rate.hpp"
#include "catalytic/stats.hpp"

using namespace catalytic;
using Catch::Approx;

namespace {

Config two_site_fixture() { return Config({{1.0, 0.0}, {0.0, 1.0}}, true); }

// Site 1 is empty and fed by type 1 from site 0 and type 2 from site 2 at
// unit rate each; sites 0 and 2 are frozen.
MigrationMatrix seeding_kernel() { return MigrationMatrix(3, {0, 0, 0, 1, -2, 1, 0, 0, 0}); }

}  // namespace

TEST_CASE("params validation") {
  InfRateParams p;
  CHECK_NOTHROW(p.validate());
  p.epsilon = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.ode_dt = 2.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("jump rate on the two-site fixture") {
  InfRateParams p;
  p.epsilon = 1.0;
  const auto A = cycle_kernel(2);
  const double expected = 5.0 / (3.0 * kPi);
  CHECK(jump_rate(two_site_fixture(), A, p, 0) == Approx(expected).epsilon(1e-12));
  CHECK(jump_rate(two_site_fixture(), A, p, 0) == Approx(0.53052).margin(1e-5));
  // Quadrature cross-check of the region mass.
  const double quad = nu_quadrature::u_lower_mass(1.0).value + nu_quadrature::u_upper_mass(1.0).value +
                      nu_quadrature::v_tail_mass(1.0).value;
  CHECK(jump_rate(two_site_fixture(), A, p, 0) == Approx(quad).epsilon(1e-9));
}

TEST_CASE("jump rate vanishes without migration") {
  InfRateParams p;
  for (Site k = 0; k < 2; ++k) CHECK(jump_rate(two_site_fixture(), MigrationMatrix::zero(2), p, k) == 0.0);
}

TEST_CASE("jump rate as a function of the present mass") {
  // rate = (flow / eps) g(eps / z) with g(d) = d nu(region(d)). g decreases
  // on d >= 0.1785 but rises again below it, towards g(0) = 2/pi, so the rate
  // grows with z only up to z ~ 5.6 eps and then settles from above.
  InfRateParams p;
  p.epsilon = 0.1;
  const auto A = cycle_kernel(2);
  auto rate = [&](double z) { return jump_rate(Config({{z, 0.0}, {0.0, 1.0}}, true), A, p, 0); };
  double prev = 0.0;
  for (double z = 0.001; z <= 5.0 * p.epsilon; z *= 1.05) {
    const double r = rate(z);
    CHECK(r >= prev);
    prev = r;
  }
  const double limit = 2.0 / kPi / p.epsilon;
  double peak = 0.0;
  for (double z = 0.5; z < 1e4; z *= 1.05) {
    const double r = rate(z);
    peak = std::max(peak, r);
    CHECK(r >= limit);
    CHECK(r <= limit * 1.0026);
  }
  CHECK(peak > limit * 1.002);
  CHECK(rate(1e6) == Approx(limit).epsilon(1e-6));
}

TEST_CASE("jump rate rejects non-E states") {
  const Config x({{1.0, 1.0}, {0.0, 1.0}}, false);
  CHECK_THROWS_AS(jump_rate(x, cycle_kernel(2), InfRateParams{}, 0), std::domain_error);
}

TEST_CASE("initial drift slope at the fixture") {
  InfRateParams p;
  p.epsilon = 1.0;
  p.ode_dt = 1e-7;
  const double h = 1e-7;
  const Config next = drift_between_jumps(two_site_fixture(), cycle_kernel(2), p, h);
  const double slope = (next[0].x1 - 1.0) / h;
  CHECK(slope == Approx(-1.0 - nu_quadrature::compensator(1.0).value).margin(1e-5));
  CHECK(slope == Approx(-1.24361).margin(1e-4));
  CHECK(next[0].x2 == 0.0);
  CHECK(next[1].x1 == 0.0);
}

TEST_CASE("drift without opposite flow is the linear ODE") {
  InfRateParams p;
  p.ode_dt = 1e-3;
  const auto A = cycle_kernel(3, 0.7);
  const Config x({{1.0, 0.0}, {0.5, 0.0}, {0.25, 0.0}}, true);
  const Config y = drift_between_jumps(x, A, p, 0.5);
  const auto exact = semigroup_apply(A, 0.5, x.type(1));
  for (Site k = 0; k < 3; ++k) {
    CHECK(y[k].x1 == Approx(exact[k]).margin(1e-8));
    CHECK(y[k].x2 == 0.0);
  }
}

TEST_CASE("drift with A = 0 leaves the state alone") {
  const Config x = two_site_fixture();
  CHECK(drift_between_jumps(x, MigrationMatrix::zero(2), InfRateParams{}, 0.3) == x);
}

TEST_CASE("drift keeps present masses positive") {
  InfRateParams p;
  p.ode_dt = 0.5;
  const Config x({{1e-3, 0.0}, {0.0, 50.0}}, true);
  const Config y = drift_between_jumps(x, cycle_kernel(2), p, 0.5);
  CHECK(y[0].x1 > 0.0);
  CHECK(y[0].x2 == 0.0);
  CHECK(validate_E(y));
}

TEST_CASE("jump outcomes follow the J rule") {
  JumpEvent ev;
  {
    const Config x({{2.0, 0.0}}, true);
    const Config y = apply_jump_outcome(x, 0, {Axis::V, 3.0}, &ev);
    CHECK(y[0] == TypePair{0.0, 6.0});
    CHECK(ev.branch == EventBranch::Flip);
    CHECK(ev.value == 6.0);
    CHECK(ev.prior_type == PresentType::Type1);
  }
  {
    const Config x({{0.0, 5.0}}, true);
    const Config y = apply_jump_outcome(x, 0, {Axis::U, 0.4}, &ev);
    CHECK(y[0].x1 == 0.0);
    CHECK(y[0].x2 == Approx(2.0));
    CHECK(ev.branch == EventBranch::Multiply);
    CHECK(ev.prior_mass == 5.0);
  }
  const Config empty({{0.0, 0.0}}, true);
  CHECK_THROWS_AS(apply_jump_outcome(empty, 0, {Axis::U, 2.0}), std::logic_error);
}

TEST_CASE("sampled jumps always move the state and keep it on E") {
  InfRateParams p;
  p.epsilon = 0.5;
  RandomStream rng(11, "jumps", 0);
  for (int i = 0; i < 5000; ++i) {
    const Config x({{0.0, 0.3 + 0.001 * i}}, true);
    JumpEvent ev;
    const Config y = apply_jump(x, 0, p, rng, &ev);
    REQUIRE(validate_E(y));
    REQUIRE(!(y == x));
    if (ev.branch == EventBranch::Multiply) {
      REQUIRE(y[0].x1 == 0.0);
      REQUIRE(std::abs(ev.value - 1.0) * x[0].x2 >= p.epsilon * (1.0 - 1e-12));
    } else {
      REQUIRE(y[0].x2 == 0.0);
      REQUIRE(ev.value >= p.epsilon * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("seeding an empty site") {
  InfRateParams p;
  const auto A = seeding_kernel();
  SECTION("two-sided inflow seeds type 2") {
    const Config x({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}}, true);
    const auto r = seed_empty_site(x, 1, A, p);
    CHECK(r.seeded);
    CHECK(r.state[1] == TypePair{0.0, 1e-3});
  }
  SECTION("one-sided inflow grows by the drift") {
    const Config x({{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, true);
    const auto r = seed_empty_site(x, 1, A, p);
    CHECK_FALSE(r.seeded);
    CHECK(r.state == x);
    const Config y = drift_between_jumps(x, A, p, 0.1);
    CHECK(y[1].x1 == Approx((1.0 - std::exp(-0.2)) / 2.0).epsilon(1e-6));
    CHECK(y[1].x2 == 0.0);
  }
  SECTION("no inflow is a no-op") {
    const Config x({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, true);
    const auto r = seed_empty_site(x, 1, A, p);
    CHECK_FALSE(r.seeded);
    CHECK(r.state == x);
  }
  SECTION("occupied site is rejected") {
    const Config x({{1.0, 0.0}, {0.0, 2.0}, {0.0, 1.0}}, true);
    CHECK_THROWS_AS(seed_empty_site(x, 1, A, p), std::domain_error);
  }
}

TEST_CASE("next-event step with A = 0") {
  RandomStream rng(3);
  const Config x = two_site_fixture();
  const auto r = advance_to_next_event(x, MigrationMatrix::zero(2), InfRateParams{}, 0.0, 0.7, rng);
  CHECK(r.site == kNoSite);
  CHECK(r.time == 0.7);
  CHECK(r.state == x);
}

TEST_CASE("constant path without migration") {
  RandomStream rng(4);
  const Config x = two_site_fixture();
  const auto log = simulate_infinite_rate(x, MigrationMatrix::zero(2), InfRateParams{}, {0.0, 0.5, 1.0}, rng);
  CHECK(log.events.empty());
  REQUIRE(log.snapshots.size() == 3);
  for (const auto& s : log.snapshots) CHECK(s.state == x);
}

TEST_CASE("E-valued after every sub-step, jump and seed") {
  InfRateParams p;
  p.epsilon = 0.1;
  const auto A = cycle_kernel(3, 0.7);
  const Config x0({{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}}, true);
  std::size_t calls = 0, violations = 0, jumps = 0;
  StateObserver obs = [&](const Config& c, StepKind kind) {
    ++calls;
    if (kind == StepKind::Jump) ++jumps;
    if (!validate_E(c)) ++violations;
  };
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    RandomStream rng(21, "e-valued", rep);
    const auto log = simulate_infinite_rate(x0, A, p, {0.5, 1.0}, rng, obs);
    for (std::size_t i = 1; i < log.events.size(); ++i) REQUIRE(log.events[i].time >= log.events[i - 1].time);
    REQUIRE(log.snapshots.size() == 2);
  }
  CHECK(calls > 1000);
  CHECK(jumps > 0);
  CHECK(violations == 0);
}

TEST_CASE("flip events zero the previous type") {
  InfRateParams p;
  p.epsilon = 0.1;
  const auto A = cycle_kernel(2);
  std::size_t flips = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    RandomStream rng(22, "flips", rep);
    Config prev = two_site_fixture();
    StateObserver obs = [&](const Config& c, StepKind kind) {
      if (kind == StepKind::Jump) {
        for (Site k = 0; k < 2; ++k) {
          const bool was1 = prev[k].x1 > 0.0, is1 = c[k].x1 > 0.0;
          const bool was2 = prev[k].x2 > 0.0, is2 = c[k].x2 > 0.0;
          if ((was1 && is2) || (was2 && is1)) {
            ++flips;
            CHECK((c[k].x1 == 0.0 || c[k].x2 == 0.0));
          }
        }
      }
      prev = c;
    };
    simulate_infinite_rate(two_site_fixture(), A, p, {1.0}, rng, obs);
  }
  CHECK(flips > 0);
}

TEST_CASE("same seed, same path") {
  InfRateParams p;
  const auto A = cycle_kernel(2);
  RandomStream a(9, "path", 3), b(9, "path", 3);
  const auto la = simulate_infinite_rate(two_site_fixture(), A, p, {0.5, 1.0}, a);
  const auto lb = simulate_infinite_rate(two_site_fixture(), A, p, {0.5, 1.0}, b);
  REQUIRE(la.events.size() == lb.events.size());
  for (std::size_t i = 0; i < la.events.size(); ++i) CHECK(la.events[i].time == lb.events[i].time);
  CHECK(la.snapshots.back().state == lb.snapshots.back().state);
}

TEST_CASE("snapshot times are validated") {
  RandomStream rng(1);
  CHECK_THROWS_AS(simulate_infinite_rate(two_site_fixture(), cycle_kernel(2), InfRateParams{}, {1.5}, rng),
                  std::invalid_argument);
}

TEST_CASE("seed level does not change the race outcome") {
  InfRateParams p;
  p.epsilon = 0.1;
  p.T = 0.1;
  const auto A = seeding_kernel();
  const Config x0({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}}, true);
  auto type1_freq = [&](double l) {
    p.seed_mass_inv = l;
    std::vector<double> hit;
    for (std::uint64_t rep = 0; rep < 2000; ++rep) {
      RandomStream rng(31, "seed-level", rep);
      const Config x = simulate_infinite_rate_final(x0, A, p, rng);
      hit.push_back(x[1].x1 > 0.0 ? 1.0 : 0.0);
    }
    return estimate_of(hit);
  };
  const auto lo = type1_freq(1e3);
  const auto hi = type1_freq(1e4);
  const double se = std::hypot(lo.se_re, hi.se_re);
  INFO("P(type 1) at l=1e3: " << lo.mean.real() << ", at l=1e4: " << hi.mean.real());
  CHECK(std::abs(lo.mean.real() - hi.mean.real()) <= 3.0 * se);
}
