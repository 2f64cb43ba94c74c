#pragma once

// Event-driven simulation of the infinite-rate mutually catalytic process at a
// fixed small-jump cutoff eps on the window.
//
// At a site where type i is present with mass z the dynamics are:
//   * drift   dz/dt = (A x_i)(k) - c1(eps/z) (A x_{3-i})(k), the absent type
//     stays exactly 0;
//   * jumps   at rate (A x_{3-i})(k)/z * nu(region(eps/z)), with y ~ nu
//     restricted to that region: y = (u,0) multiplies z by u, y = (0,v) hands
//     the site to type 3-i with mass v z;
//   * an empty site whose inflow is one-sided grows by inflow alone; when both
//     inflows are positive it is seeded with type 2 at mass 1/l before the
//     dynamics continue.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_state.hpp"
#include "event_clock.hpp"
#include "format.hpp"
#include "jump_measure.hpp"
#include "migration.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace catalytic {

struct InfRateParams {
  double epsilon = 0.1;
  double T = 1.0;
  double ode_dt = 1e-3;
  double seed_mass_inv = 1e3;
  /// Sub-step halving gives up below this length.
  double min_substep = 1e-12;
  /// When positive, every sub-step is checked against two half steps and
  /// halved while the difference exceeds this relative tolerance.
  double richardson_tol = 0.0;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (!(ode_dt > 0.0) || ode_dt > T) throw std::invalid_argument("ode_dt must lie in (0, T]");
    if (!(seed_mass_inv > 0.0)) throw std::invalid_argument("seed_mass_inv must be positive");
  }
};

enum class PresentType { None = 0, Type1 = 1, Type2 = 2 };

struct SiteState {
  PresentType type = PresentType::None;
  double mass = 0.0;
};

inline SiteState site_state(const TypePair& p) {
  if (!on_boundary(p)) throw std::domain_error("site_state: both types present");
  if (p.x1 > 0.0) return {PresentType::Type1, p.x1};
  if (p.x2 > 0.0) return {PresentType::Type2, p.x2};
  return {};
}

enum class EventBranch { Multiply, Flip, Seed };

inline const char* branch_name(EventBranch b) {
  switch (b) {
    case EventBranch::Multiply: return "MULTIPLY";
    case EventBranch::Flip: return "FLIP";
    case EventBranch::Seed: return "SEED";
  }
  return "?";
}

struct JumpEvent {
  double time = 0.0;
  Site site = 0;
  EventBranch branch = EventBranch::Multiply;
  double value = 0.0;  ///< multiplier u (MULTIPLY), new mass v z (FLIP) or seed mass (SEED)
  PresentType prior_type = PresentType::None;
  double prior_mass = 0.0;
};

struct Snapshot {
  double time;
  Config state;
};

struct EventLog {
  std::vector<JumpEvent> events;
  std::vector<Snapshot> snapshots;
};

/// Where an observer call comes from.
enum class StepKind { Substep, Jump, Seed };
using StateObserver = std::function<void(const Config&, StepKind)>;

namespace detail {

/// Shared machinery; buffers are reused across calls so a path does not
/// allocate per sub-step.
class InfiniteRateDynamics {
 public:
  InfiniteRateDynamics(const MigrationMatrix& A, const InfRateParams& p) : A_(A), p_(p) {}

  const MigrationMatrix& kernel() const { return A_; }
  const InfRateParams& params() const { return p_; }

  void flows(const Config& x, std::vector<double>& f1, std::vector<double>& f2) const {
    const std::size_t n = x.size();
    f1.assign(n, 0.0);
    f2.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        const double a = A_(k, l);
        s1 += a * x[l].x1;
        s2 += a * x[l].x2;
      }
      f1[k] = s1;
      f2[k] = s2;
    }
  }

  double site_rate(const TypePair& xk, double f1, double f2) const {
    double z, opposite;
    if (xk.x1 > 0.0) {
      z = xk.x1;
      opposite = f2;
    } else if (xk.x2 > 0.0) {
      z = xk.x2;
      opposite = f1;
    } else {
      return 0.0;
    }
    if (!(opposite > 0.0)) return 0.0;
    return opposite / z * nu_region_mass(NuRegion(p_.epsilon / z)).total();
  }

  void rates(const Config& x, std::vector<double>& out) const {
    flows(x, f1_, f2_);
    out.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = site_rate(x[k], f1_[k], f2_[k]);
  }

  /// Types allowed to move this sub-step: the present type, or for an empty
  /// site the single type with positive inflow.
  void active_mask(const Config& x, std::vector<int>& mask) const {
    flows(x, f1_, f2_);
    mask.assign(x.size(), 0);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k].x1 > 0.0) mask[k] = 1;
      else if (x[k].x2 > 0.0) mask[k] = 2;
      else if (f1_[k] > 0.0 && !(f2_[k] > 0.0)) mask[k] = 1;
      else if (f2_[k] > 0.0 && !(f1_[k] > 0.0)) mask[k] = 2;
    }
  }

  void derivative(const Config& x, const std::vector<int>& mask, std::vector<TypePair>& d) const {
    flows(x, f1_, f2_);
    d.assign(x.size(), TypePair{});
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (mask[k] == 1) {
        const double z = x[k].x1;
        d[k].x1 = f1_[k] - (z > 0.0 && f2_[k] != 0.0 ? compensator_coefficient(p_.epsilon / z) * f2_[k] : 0.0);
      } else if (mask[k] == 2) {
        const double z = x[k].x2;
        d[k].x2 = f2_[k] - (z > 0.0 && f1_[k] != 0.0 ? compensator_coefficient(p_.epsilon / z) * f1_[k] : 0.0);
      }
    }
  }

  /// One Heun (explicit trapezoid) step; false if a present mass would reach 0.
  bool heun(const Config& x, double h, const std::vector<int>& mask, Config& out) const {
    derivative(x, mask, d0_);
    mid_ = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
      mid_[k].x1 += h * d0_[k].x1;
      mid_[k].x2 += h * d0_[k].x2;
      if (!positive_where_present(x[k], mid_[k])) return false;
    }
    derivative(mid_, mask, d1_);
    out = x;
    for (std::size_t k = 0; k < x.size(); ++k) {
      out[k].x1 += 0.5 * h * (d0_[k].x1 + d1_[k].x1);
      out[k].x2 += 0.5 * h * (d0_[k].x2 + d1_[k].x2);
      if (!positive_where_present(x[k], out[k])) return false;
    }
    return true;
  }

  Config substep(const Config& x, double h) const {
    if (h == 0.0) return x;
    std::vector<int> mask;
    active_mask(x, mask);
    return substep_masked(x, h, mask);
  }

  /// Drift over [0, h] in sub-steps of at most ode_dt.
  Config drift(Config x, double h) const {
    while (h > 0.0) {
      const double s = std::min(h, p_.ode_dt);
      x = substep(x, s);
      h = h - s <= 1e-15 * p_.ode_dt ? 0.0 : h - s;
    }
    return x;
  }

 private:
  static bool positive_where_present(const TypePair& before, const TypePair& after) {
    if (before.x1 > 0.0 && !(after.x1 > 0.0)) return false;
    if (before.x2 > 0.0 && !(after.x2 > 0.0)) return false;
    return after.x1 >= 0.0 && after.x2 >= 0.0;
  }

  Config substep_masked(const Config& x, double h, const std::vector<int>& mask) const {
    if (h < p_.min_substep)
      throw NumericalError("drift: sub-step fell below " + format_double(p_.min_substep) +
                           " while keeping present masses positive");
    Config out(x.size(), x.e_constrained);
    if (!heun(x, h, mask, out)) {
      Config half = substep_masked(x, 0.5 * h, mask);
      return substep_masked(half, 0.5 * h, mask);
    }
    if (p_.richardson_tol > 0.0) {
      Config half = x;
      Config two(x.size(), x.e_constrained);
      if (heun(x, 0.5 * h, mask, half) && heun(half, 0.5 * h, mask, two)) {
        double worst = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
          const double scale = std::max({1e-12, std::abs(two[k].x1) + std::abs(two[k].x2)});
          worst = std::max(worst, (std::abs(two[k].x1 - out[k].x1) + std::abs(two[k].x2 - out[k].x2)) / scale);
        }
        if (worst <= p_.richardson_tol) return two;
      }
      Config first = substep_masked(x, 0.5 * h, mask);
      return substep_masked(first, 0.5 * h, mask);
    }
    return out;
  }

  const MigrationMatrix& A_;
  InfRateParams p_;
  mutable std::vector<double> f1_, f2_;
  mutable std::vector<TypePair> d0_, d1_;
  mutable Config mid_;
};

}  // namespace detail

inline void require_e_valued(const Config& x, const char* what) {
  if (!validate_E(x)) throw std::domain_error(std::string(what) + ": state must be E-valued");
}

/// Total jump intensity at site k: incoming opposite-type flow over the
/// present mass, times nu of the region with delta = eps / mass.
inline double jump_rate(const Config& state, const MigrationMatrix& A, const InfRateParams& params, Site k) {
  require_e_valued(state, "jump_rate");
  detail::InfiniteRateDynamics dyn(A, params);
  std::vector<double> r;
  dyn.rates(state, r);
  return r.at(k);
}

/// Deterministic drift over dt_sub (Heun sub-steps of at most ode_dt, halved
/// whenever a present mass would reach 0). Empty sites with one-sided
/// inflow grow by that inflow; empty sites with two-sided inflow are left
/// for seed_empty_site.
inline Config drift_between_jumps(const Config& state, const MigrationMatrix& A, const InfRateParams& params,
                                  double dt_sub) {
  require_e_valued(state, "drift_between_jumps");
  if (dt_sub < 0.0) throw std::domain_error("drift_between_jumps: negative duration");
  detail::InfiniteRateDynamics dyn(A, params);
  return dyn.drift(state, dt_sub);
}

struct SeedResult {
  Config state;
  bool seeded = false;  ///< true iff a seed mass was written
};

/// Empty site k with inflows (a1, a2) = ((A x1)(k), (A x2)(k)):
///   both zero      -> unchanged;
///   one positive   -> unchanged here, that type then grows from 0 under the drift;
///   both positive  -> type 2 is placed at mass 1/seed_mass_inv.
inline SeedResult seed_empty_site(const Config& state, Site k, const MigrationMatrix& A, const InfRateParams& params) {
  if (k >= state.size()) throw std::out_of_range("seed_empty_site: site outside window");
  if (state[k].x1 != 0.0 || state[k].x2 != 0.0) throw std::domain_error("seed_empty_site: site is not empty");
  double a1 = 0.0, a2 = 0.0;
  for (std::size_t l = 0; l < state.size(); ++l) {
    a1 += A(k, l) * state[l].x1;
    a2 += A(k, l) * state[l].x2;
  }
  SeedResult r{state, false};
  if (a1 > 0.0 && a2 > 0.0) {
    r.state[k] = {0.0, 1.0 / params.seed_mass_inv};
    r.seeded = true;
  }
  return r;
}

/// Apply the jump at site k with a given outcome y from nu.
inline Config apply_jump_outcome(const Config& state, Site k, const BoundaryPoint& y, JumpEvent* ev = nullptr) {
  const SiteState s = site_state(state.values.at(k));
  if (s.type == PresentType::None) throw std::logic_error("apply_jump: site is empty");
  Config out = state;
  const bool type1 = s.type == PresentType::Type1;
  if (y.branch == Axis::U) {
    (type1 ? out[k].x1 : out[k].x2) = y.coord * s.mass;
  } else {
    out[k] = type1 ? TypePair{0.0, y.coord * s.mass} : TypePair{y.coord * s.mass, 0.0};
  }
  if (ev) {
    ev->site = k;
    ev->branch = y.branch == Axis::U ? EventBranch::Multiply : EventBranch::Flip;
    ev->value = y.branch == Axis::U ? y.coord : y.coord * s.mass;
    ev->prior_type = s.type;
    ev->prior_mass = s.mass;
  }
  return out;
}

/// Draw y from nu on region(eps / z) and apply it at site k.
inline Config apply_jump(const Config& state, Site k, const InfRateParams& params, RandomStream& rng,
                         JumpEvent* ev = nullptr) {
  const SiteState s = site_state(state.values.at(k));
  if (s.type == PresentType::None) throw std::logic_error("apply_jump: site is empty");
  const BoundaryPoint y = sample_nu(NuRegion(params.epsilon / s.mass), rng);
  return apply_jump_outcome(state, k, y, ev);
}

namespace detail {

/// Adapter plugging the infinite-rate dynamics into advance_with_clock.
struct ClockDynamics {
  const InfiniteRateDynamics& dyn;
  std::vector<JumpEvent>* events = nullptr;
  const StateObserver* observer = nullptr;

  void rates(const Config& x, std::vector<double>& out) const { dyn.rates(x, out); }

  Config step(const Config& x, double h) const {
    Config next = dyn.substep(x, h);
    if (observer && *observer) (*observer)(next, StepKind::Substep);
    return next;
  }

  bool prepare(Config& x, double t) const {
    bool changed = false;
    for (Site k = 0; k < x.size(); ++k) {
      if (x[k].x1 != 0.0 || x[k].x2 != 0.0) continue;
      SeedResult r = seed_empty_site(x, k, dyn.kernel(), dyn.params());
      if (!r.seeded) continue;
      x = std::move(r.state);
      changed = true;
      if (events) {
        JumpEvent ev;
        ev.time = t;
        ev.site = k;
        ev.branch = EventBranch::Seed;
        ev.value = x[k].x2;
        events->push_back(ev);
      }
      if (observer && *observer) (*observer)(x, StepKind::Seed);
    }
    return changed;
  }
};

}  // namespace detail

struct EventStep {
  double time;
  Site site;  ///< kNoSite if t_max was reached without an event
  Config state;
};

/// Drift the state forward while integrating the total jump intensity
/// against an Exp(1) draw; stops at the first event or at t_max.
inline EventStep advance_to_next_event(const Config& state, const MigrationMatrix& A, const InfRateParams& params,
                                       double t_now, double t_max, RandomStream& rng) {
  require_e_valued(state, "advance_to_next_event");
  detail::InfiniteRateDynamics dyn(A, params);
  detail::ClockDynamics cd{dyn};
  auto r = advance_with_clock(state, cd, t_now, t_max, params.ode_dt, rng);
  return {r.time, r.site, std::move(r.state)};
}

/// One path on [0, T]: drift, clock, jump, repeated; snapshots are taken at
/// the requested times (each in [0, T]). The observer, if set,
/// sees the state after every sub-step, jump and seed.
inline EventLog simulate_infinite_rate(const Config& x0, const MigrationMatrix& A, const InfRateParams& params,
                                       std::vector<double> snapshot_times, RandomStream& rng,
                                       const StateObserver& observer = {}) {
  params.validate();
  require_e_valued(x0, "simulate_infinite_rate");
  if (x0.size() != A.size()) throw std::invalid_argument("simulate_infinite_rate: kernel and state windows differ");
  std::sort(snapshot_times.begin(), snapshot_times.end());
  for (double t : snapshot_times)
    if (t < 0.0 || t > params.T) throw std::invalid_argument("snapshot time outside [0, T]");

  EventLog log;
  detail::InfiniteRateDynamics dyn(A, params);
  detail::ClockDynamics cd{dyn, &log.events, &observer};
  Config x = x0;
  x.e_constrained = true;
  double t = 0.0;
  std::size_t next_snap = 0;
  while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= 0.0)
    log.snapshots.push_back({snapshot_times[next_snap++], x});

  const bool frozen = A.is_zero();
  while (t < params.T) {
    const double stop = next_snap < snapshot_times.size() ? snapshot_times[next_snap] : params.T;
    if (frozen) {
      t = stop;
    } else {
      auto r = advance_with_clock(std::move(x), cd, t, stop, params.ode_dt, rng);
      x = std::move(r.state);
      t = r.time;
      if (r.site != kNoSite) {
        JumpEvent ev;
        ev.time = t;
        x = apply_jump(x, r.site, params, rng, &ev);
        log.events.push_back(ev);
        if (observer) observer(x, StepKind::Jump);
      }
    }
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t)
      log.snapshots.push_back({snapshot_times[next_snap++], x});
  }
  return log;
}

/// State of one path at time T.
inline Config simulate_infinite_rate_final(const Config& x0, const MigrationMatrix& A, const InfRateParams& params,
                                           RandomStream& rng) {
  EventLog log = simulate_infinite_rate(x0, A, params, {params.T}, rng);
  return std::move(log.snapshots.back().state);
}

}  // namespace catalytic
