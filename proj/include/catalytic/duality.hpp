#pragma once

// Forward/dual Monte Carlo for E[H(X_t, y)] = E[H(x, Y_t)], moment-bound
// reports, jump-count bounds, and the finite-rate gamma sweep.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_state.hpp"
#include "finite_rate.hpp"
#include "infinite_rate.hpp"
#include "migration.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace catalytic {

inline Config simulate_dual(const DualConfig& y0, const MigrationMatrix& A, InfRateParams params, double t,
                            RandomStream& rng) {
  if (t < 0.0) throw std::domain_error("simulate_dual: t must be nonnegative");
  Config y(y0.values, true);
  if (t == 0.0) return y;
  params.T = t;
  params.ode_dt = std::min(params.ode_dt, t);
  return simulate_infinite_rate_final(y, A.transpose(), params, rng);
}

/// Dual path with its event log, for reachability checks.
inline EventLog simulate_dual_log(const DualConfig& y0, const MigrationMatrix& A, InfRateParams params, double t,
                                  RandomStream& rng) {
  params.T = t;
  params.ode_dt = std::min(params.ode_dt, t);
  return simulate_infinite_rate(Config(y0.values, true), A.transpose(), params, {t}, rng);
}

struct McSettings {
  std::size_t n_reps = 10000;
  std::uint64_t seed = 1;
  std::string tag;  ///< mixed into stream keys; distinguishes experiments
  unsigned workers = 0;
};

inline Config forward_state(const Config& x0, const MigrationMatrix& A, InfRateParams params, double t,
                            RandomStream& rng) {
  if (t == 0.0) return x0;
  params.T = t;
  params.ode_dt = std::min(params.ode_dt, t);
  return simulate_infinite_rate_final(x0, A, params, rng);
}

inline Estimate estimate_H_forward(const Config& x0, const DualConfig& y, const MigrationMatrix& A,
                                   const InfRateParams& params, double t, const McSettings& mc) {
  if (mc.n_reps < 2) throw std::domain_error("estimate_H_forward: n_reps must be at least 2");
  auto samples = parallel_replicates(
      mc.n_reps,
      [&](std::size_t rep) {
        RandomStream rng(mc.seed, mc.tag + "/forward", rep);
        return duality_H(forward_state(x0, A, params, t, rng), y);
      },
      mc.workers);
  return estimate_of(samples);
}

inline Estimate estimate_H_dual(const Config& x, const DualConfig& y0, const MigrationMatrix& A,
                                const InfRateParams& params, double t, const McSettings& mc) {
  if (mc.n_reps < 2) throw std::domain_error("estimate_H_dual: n_reps must be at least 2");
  auto samples = parallel_replicates(
      mc.n_reps,
      [&](std::size_t rep) {
        RandomStream rng(mc.seed, mc.tag + "/dual", rep);
        return duality_H(x, DualConfig(simulate_dual(y0, A, params, t, rng).values));
      },
      mc.workers);
  return estimate_of(samples);
}

struct DualityGap {
  Estimate forward;
  Estimate dual;
  double gap = 0.0;
  double threshold = 0.0;  ///< 3 sqrt(SE_f^2 + SE_d^2)
  double combined_se = 0.0;
  double z_re = 0.0, z_im = 0.0;  ///< componentwise z-scores, diagnostic only
  bool pass = true;
};

inline DualityGap duality_gap(const Config& x0, const DualConfig& y, const MigrationMatrix& A,
                              const InfRateParams& params, double t, const McSettings& mc) {
  DualityGap g;
  g.forward = estimate_H_forward(x0, y, A, params, t, mc);
  g.dual = estimate_H_dual(x0, y, A, params, t, mc);
  g.gap = std::abs(g.forward.mean - g.dual.mean);
  g.combined_se = std::hypot(g.forward.std_error, g.dual.std_error);
  g.threshold = 3.0 * g.combined_se;
  auto z = [](double d, double a, double b) {
    const double s = std::hypot(a, b);
    return s > 0.0 ? d / s : 0.0;
  };
  g.z_re = z(g.forward.mean.real() - g.dual.mean.real(), g.forward.se_re, g.dual.se_re);
  g.z_im = z(g.forward.mean.imag() - g.dual.mean.imag(), g.forward.se_im, g.dual.se_im);
  g.pass = g.gap <= g.threshold;
  return g;
}

// --- moment bounds ------------------------------------------------------------

struct MomentRow {
  std::string kind;  ///< "single" or "cross"
  Site k1 = 0, k2 = 0;
  int type = 0;      ///< 1 or 2 for single rows, 0 for cross rows
  double mean = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct MomentReport {
  double t = 0.0;
  std::vector<MomentRow> rows;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

using StateSampler = std::function<Config(std::size_t rep)>;

/// Single bounds E[X_{t,i}(k)] <= (e^{t|A|} x_i)(k) and cross bounds
/// E[X_{t,1}(k1) X_{t,2}(k2)] <= (e^{t|A|} x_1)(k1) (e^{t|A|} x_2)(k2), k1 != k2,
/// each flagged when the mean exceeds the bound by more than 3 SE.
inline MomentReport moment_check(const Config& x0, const MigrationMatrix& A, double t, std::size_t n_reps,
                                 const StateSampler& sampler, unsigned workers = 0) {
  if (n_reps < 2) throw std::domain_error("moment_check: n_reps must be at least 2");
  const std::size_t n = x0.size();
  const auto b1 = bold_apply(A, t, x0.type(1));
  const auto b2 = bold_apply(A, t, x0.type(2));
  auto states = parallel_replicates(n_reps, sampler, workers);
  MomentReport rep;
  rep.t = t;
  auto add = [&](std::string kind, Site k1, Site k2, int type, double bound, auto&& value) {
    std::vector<double> s(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) s[r] = value(states[r]);
    const Estimate e = estimate_of(s);
    MomentRow row{std::move(kind), k1, k2, type, e.mean.real(), e.se_re, bound, false};
    row.pass = row.mean <= row.bound + 3.0 * row.se;
    rep.rows.push_back(row);
  };
  for (Site k = 0; k < n; ++k) {
    add("single", k, k, 1, b1[k], [k](const Config& c) { return c[k].x1; });
    add("single", k, k, 2, b2[k], [k](const Config& c) { return c[k].x2; });
  }
  for (Site k1 = 0; k1 < n; ++k1)
    for (Site k2 = 0; k2 < n; ++k2)
      if (k1 != k2)
        add("cross", k1, k2, 0, b1[k1] * b2[k2], [k1, k2](const Config& c) { return c[k1].x1 * c[k2].x2; });
  return rep;
}

// --- jump counts ----------------------------------------------------------------

/// True for a jump whose absolute size at the present type is at least delta:
/// |u - 1| z >= delta for a multiplier, v z >= delta for a flip.
inline bool jump_at_least(const JumpEvent& ev, double delta) {
  if (ev.branch == EventBranch::Multiply) return std::abs(ev.value - 1.0) * ev.prior_mass >= delta;
  if (ev.branch == EventBranch::Flip) return ev.value >= delta;
  return false;
}

/// (4/pi) delta^{-2} int_0^t (e^{s|A|} x_i)(k) (|A| e^{s|A|} x_{3-i})(k) ds by
/// composite Simpson on `panels` (even) panels.
inline double jump_count_bound(const Config& x0, const MigrationMatrix& A, double t, double delta, Site k, int i,
                               int panels = 200) {
  const MigrationMatrix absA = A.absolute();
  auto g = [&](double s) {
    const auto own = bold_apply(A, s, x0.type(i));
    const auto other = absA.apply(bold_apply(A, s, x0.type(3 - i)));
    return own[k] * other[k];
  };
  const double h = t / panels;
  double sum = g(0.0) + g(t);
  for (int j = 1; j < panels; ++j) sum += (j % 2 ? 4.0 : 2.0) * g(j * h);
  return 4.0 / kPi / (delta * delta) * sum * h / 3.0;
}

// --- gamma sweep ------------------------------------------------------------------

/// int_0^T f(t) e^{-t} dt by the trapezoid rule on the given grid.
inline Complex weighted_time_average(const std::vector<double>& times, const std::vector<Complex>& values) {
  Complex acc{};
  for (std::size_t j = 1; j < times.size(); ++j) {
    const double h = times[j] - times[j - 1];
    acc += 0.5 * h * (values[j - 1] * std::exp(-times[j - 1]) + values[j] * std::exp(-times[j]));
  }
  return acc;
}

inline std::vector<double> uniform_grid(double T, double step) {
  const auto m = static_cast<std::size_t>(std::llround(T / step));
  std::vector<double> g(m + 1);
  for (std::size_t j = 0; j <= m; ++j) g[j] = j == m ? T : static_cast<double>(j) * step;
  return g;
}

struct GammaRow {
  double gamma = 0.0;
  Estimate functional;  ///< e^{-t}-weighted time average of H(Y_t, y)
  Estimate fixed_t;     ///< H(Y_T, y), not gated
  Estimate degeneracy;  ///< int_0^T sum_k min(Y1 Y2, 1) ds
  double gap = 0.0;
  double gap_se = 0.0;
};

struct GammaSweep {
  Estimate infinite_functional;
  Estimate infinite_fixed_t;
  std::vector<GammaRow> rows;
  bool gap_shrinks = false;           ///< gap(first) - gap(last) > 2 combined SE
  bool degeneracy_decreases = false;  ///< no rise beyond 2 combined SE, net decrease
};

struct GammaSweepSettings {
  std::vector<double> gammas{1.0, 10.0, 100.0, 1000.0};
  double T = 1.0;
  double grid_step = 0.05;
  /// Finite-rate step as a multiple of 1/max(1, gamma); 0 keeps the default.
  double dt_scale = 0.0;
  std::size_t finite_reps = 400;
  std::size_t infinite_reps = 10000;
};

inline GammaSweep gamma_sweep(const Config& x0, const DualConfig& y, const MigrationMatrix& A,
                              const InfRateParams& inf_params, const GammaSweepSettings& st, const McSettings& mc) {
  const auto grid = uniform_grid(st.T, st.grid_step);
  GammaSweep out;

  {
    InfRateParams p = inf_params;
    p.T = st.T;
    p.ode_dt = std::min(p.ode_dt, st.T);
    auto per_path = parallel_replicates(
        st.infinite_reps,
        [&](std::size_t rep) {
          RandomStream rng(mc.seed, mc.tag + "/gamma-sweep/infinite", rep);
          EventLog log = simulate_infinite_rate(x0, A, p, grid, rng);
          std::vector<Complex> h(grid.size());
          for (std::size_t j = 0; j < grid.size(); ++j) h[j] = duality_H(log.snapshots[j].state, y);
          return std::pair<Complex, Complex>{weighted_time_average(grid, h), h.back()};
        },
        mc.workers);
    std::vector<Complex> f, last;
    for (auto& [a, b] : per_path) {
      f.push_back(a);
      last.push_back(b);
    }
    out.infinite_functional = estimate_of(f);
    out.infinite_fixed_t = estimate_of(last);
  }

  for (double gamma : st.gammas) {
    FiniteRateParams fp;
    fp.gamma = gamma;
    fp.T = st.T;
    if (st.dt_scale > 0.0) fp.dt = st.dt_scale / std::max(1.0, gamma);
    struct PathSummary {
      Complex functional, last;
      double degeneracy;
    };
    auto per_path = parallel_replicates(
        st.finite_reps,
        [&](std::size_t rep) {
          RandomStream rng(mc.seed, mc.tag + "/gamma-sweep/finite/" + format_double(gamma), rep);
          FiniteRateOptions opt;
          opt.snapshot_times = grid;
          FiniteRatePath path = simulate_finite_rate(x0, A, fp, opt, rng);
          std::vector<Complex> h(grid.size());
          for (std::size_t j = 0; j < grid.size(); ++j) h[j] = duality_H(path.snapshots[j].state, y);
          double deg = 0.0;
          for (double d : path.degeneracy) deg += d;
          return PathSummary{weighted_time_average(grid, h), h.back(), deg};
        },
        mc.workers);
    std::vector<Complex> f, last;
    std::vector<double> deg;
    for (const auto& s : per_path) {
      f.push_back(s.functional);
      last.push_back(s.last);
      deg.push_back(s.degeneracy);
    }
    GammaRow row;
    row.gamma = gamma;
    row.functional = estimate_of(f);
    row.fixed_t = estimate_of(last);
    row.degeneracy = estimate_of(deg);
    row.gap = std::abs(row.functional.mean - out.infinite_functional.mean);
    row.gap_se = std::hypot(row.functional.std_error, out.infinite_functional.std_error);
    out.rows.push_back(row);
  }

  if (out.rows.size() >= 2) {
    const auto& a = out.rows.front();
    const auto& b = out.rows.back();
    out.gap_shrinks = a.gap - b.gap > 2.0 * std::hypot(a.gap_se, b.gap_se);
    out.degeneracy_decreases = true;
    for (std::size_t j = 1; j < out.rows.size(); ++j) {
      const auto& p = out.rows[j - 1].degeneracy;
      const auto& q = out.rows[j].degeneracy;
      if (q.mean.real() > p.mean.real() + 2.0 * std::hypot(p.se_re, q.se_re)) out.degeneracy_decreases = false;
    }
    if (!(b.degeneracy.mean.real() < a.degeneracy.mean.real())) out.degeneracy_decreases = false;
  }
  return out;
}

}  // namespace catalytic
