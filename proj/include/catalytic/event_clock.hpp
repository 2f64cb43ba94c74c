#pragma once

// Integrated-rate exponential clock for a state-dependent Poisson process
// whose state drifts deterministically between events.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "random.hpp"

namespace catalytic {

inline constexpr std::size_t kNoSite = std::numeric_limits<std::size_t>::max();

template <class State>
struct ClockResult {
  double time;
  std::size_t site;  ///< kNoSite when t_max was reached first
  State state;
};

/// Pick an index with probability proportional to `weights`.
inline std::size_t pick_proportional(const std::vector<double>& weights, double total, RandomStream& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = kNoSite;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (target < acc) return k;
  }
  return last_positive;
}

/// Runs the drift forward in sub-steps of at most `h_max`, accumulating
/// Lambda(t) = sum_k rate_k(state(t)) by the trapezoid rule, until the
/// accumulated intensity reaches an Exp(1) draw or `t_max` is hit. Inside
/// the crossing sub-step Lambda is taken linear in time and the crossing
/// time solved exactly; the state is then re-advanced to that instant and
/// the firing site drawn proportionally to the rates there.
///
/// Dynamics must provide
///   void rates(const State&, std::vector<double>&)
///   State step(const State&, double h)
///   bool prepare(State&, double t)   // e.g. seeding; true if state changed
template <class State, class Dynamics>
ClockResult<State> advance_with_clock(State state, Dynamics& dyn, double t_now, double t_max, double h_max,
                                      RandomStream& rng) {
  const double target = rng.exponential();
  std::vector<double> rates;
  double acc = 0.0;
  double t = t_now;
  dyn.prepare(state, t);
  dyn.rates(state, rates);
  double lam0 = std::accumulate(rates.begin(), rates.end(), 0.0);
  while (t < t_max) {
    const bool last = h_max >= t_max - t;
    const double h = last ? t_max - t : h_max;
    State next = dyn.step(state, h);
    dyn.rates(next, rates);
    const double lam1 = std::accumulate(rates.begin(), rates.end(), 0.0);
    const double inc = 0.5 * (lam0 + lam1) * h;
    if (acc + inc >= target && inc > 0.0) {
      const double r = target - acc;
      const double s = (lam1 - lam0) / (2.0 * h);
      double tau = 2.0 * r / (lam0 + std::sqrt(std::max(0.0, lam0 * lam0 + 4.0 * s * r)));
      tau = std::clamp(tau, 0.0, h);
      State at = tau == h ? std::move(next) : dyn.step(state, tau);
      dyn.rates(at, rates);
      double total = std::accumulate(rates.begin(), rates.end(), 0.0);
      std::size_t site = total > 0.0 ? pick_proportional(rates, total, rng) : kNoSite;
      if (site == kNoSite) {
        // Lambda vanished exactly at the crossing instant; fall back to the
        // end-of-step rates, which carried the intensity.
        dyn.rates(dyn.step(state, h), rates);
        total = std::accumulate(rates.begin(), rates.end(), 0.0);
        site = pick_proportional(rates, total, rng);
      }
      return {t + tau, site, std::move(at)};
    }
    acc += inc;
    state = std::move(next);
    t = last ? t_max : t + h;
    if (dyn.prepare(state, t)) {
      dyn.rates(state, rates);
      lam0 = std::accumulate(rates.begin(), rates.end(), 0.0);
    } else {
      lam0 = lam1;
    }
  }
  return {t_max, kNoSite, std::move(state)};
}

}  // namespace catalytic
