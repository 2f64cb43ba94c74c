#pragma once

// Euler-Maruyama for the finite-rate system
//   dY_i(k) = (A Y_i)(k) dt + sqrt(gamma) sigma(Y(k)) dW_i(k),  i = 1, 2,
// clamped at 0 after every step. The default sigma(x) = sqrt(x1 x2) is the
// Dawson-Perkins model.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_state.hpp"
#include "format.hpp"
#include "migration.hpp"
#include "random.hpp"

namespace catalytic {

using NoiseCoefficient = std::function<double(const TypePair&)>;

inline double dawson_perkins_sigma(const TypePair& x) { return std::sqrt(x.x1 * x.x2); }

struct FiniteRateParams {
  double gamma = 1.0;
  NoiseCoefficient sigma = dawson_perkins_sigma;
  /// 0 selects 1e-4 * min(1, 1/gamma).
  double dt = 0.0;
  double T = 1.0;
  /// A coordinate above this (or non-finite) aborts the path.
  double blowup = 1e12;

  double step() const { return dt > 0.0 ? dt : 1e-4 * std::min(1.0, 1.0 / gamma); }

  void validate() const {
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (dt < 0.0 || step() > T) throw std::invalid_argument("dt must lie in (0, T]");
    if (!sigma) throw std::invalid_argument("sigma must be set");
  }
};

class PathBlowup : public std::runtime_error {
 public:
  explicit PathBlowup(double t)
      : std::runtime_error("finite-rate path aborted: coordinate exceeded the blow-up bound at t = " +
                           format_double(t)),
        time(t) {}
  double time;
};

/// One step of length h with caller-supplied standard normals: noise(k, i).
template <class Noise>
Config euler_step_with(const Config& state, const MigrationMatrix& A, const FiniteRateParams& params, double h,
                       Noise&& noise) {
  const std::vector<double> a1 = A.apply(state.type(1));
  const std::vector<double> a2 = A.apply(state.type(2));
  const double scale = std::sqrt(params.gamma * h);
  Config out(state.size(), false);
  for (Site k = 0; k < state.size(); ++k) {
    const double s = scale * params.sigma(state[k]);
    const double z1 = noise(k, 1);
    const double z2 = noise(k, 2);
    out[k].x1 = std::max(0.0, state[k].x1 + a1[k] * h + s * z1);
    out[k].x2 = std::max(0.0, state[k].x2 + a2[k] * h + s * z2);
  }
  return out;
}

inline Config euler_step(const Config& state, const MigrationMatrix& A, const FiniteRateParams& params,
                         RandomStream& rng) {
  return euler_step_with(state, A, params, params.step(), [&](Site, int) { return rng.normal(); });
}

struct FiniteRateSnapshot {
  double time;
  Config state;
  std::vector<double> degeneracy;  ///< running int_0^t min(Y1 Y2, 1) ds per site
};

struct FiniteRatePath {
  std::vector<FiniteRateSnapshot> snapshots;
  std::vector<double> degeneracy;  ///< over [0, T] per site
  /// sup over the step grid of <Y_i, beta>, when weights were supplied
  double sup_beta_1 = 0.0;
  double sup_beta_2 = 0.0;
};

struct FiniteRateOptions {
  std::vector<double> snapshot_times;
  std::vector<double> beta;  ///< empty: no sup tracking
  bool zero_noise = false;
};

/// One path on [0, T]. Steps are shortened to land on snapshot times.
inline FiniteRatePath simulate_finite_rate(const Config& x0, const MigrationMatrix& A, const FiniteRateParams& params,
                                           FiniteRateOptions opt, RandomStream& rng) {
  params.validate();
  if (x0.size() != A.size()) throw std::invalid_argument("simulate_finite_rate: kernel and state windows differ");
  if (!all_finite_nonnegative(x0)) throw std::domain_error("simulate_finite_rate: initial state must be nonnegative");
  if (!opt.beta.empty() && opt.beta.size() != x0.size())
    throw std::invalid_argument("simulate_finite_rate: beta must cover the window");
  std::sort(opt.snapshot_times.begin(), opt.snapshot_times.end());
  for (double t : opt.snapshot_times)
    if (t < 0.0 || t > params.T) throw std::invalid_argument("snapshot time outside [0, T]");

  const std::size_t n = x0.size();
  const double dt = params.step();
  FiniteRatePath path;
  path.degeneracy.assign(n, 0.0);
  Config x = x0;
  x.e_constrained = false;

  auto degeneracy_density = [](const TypePair& p) { return std::min(p.x1 * p.x2, 1.0); };
  auto track_sup = [&](const Config& c) {
    if (opt.beta.empty()) return;
    path.sup_beta_1 = std::max(path.sup_beta_1, beta_norm(c.type(1), opt.beta));
    path.sup_beta_2 = std::max(path.sup_beta_2, beta_norm(c.type(2), opt.beta));
  };
  track_sup(x);

  std::size_t next_snap = 0;
  auto flush = [&](double t) {
    while (next_snap < opt.snapshot_times.size() && opt.snapshot_times[next_snap] <= t)
      path.snapshots.push_back({opt.snapshot_times[next_snap++], x, path.degeneracy});
  };
  flush(0.0);

  double t = 0.0;
  while (t < params.T) {
    const double stop = next_snap < opt.snapshot_times.size() ? opt.snapshot_times[next_snap] : params.T;
    const bool landing = stop - t <= dt * (1.0 + 1e-12);
    const double h = landing ? stop - t : dt;
    Config next = opt.zero_noise ? euler_step_with(x, A, params, h, [](Site, int) { return 0.0; })
                                 : euler_step_with(x, A, params, h, [&](Site, int) { return rng.normal(); });
    for (Site k = 0; k < n; ++k) {
      if (!(next[k].x1 <= params.blowup && next[k].x2 <= params.blowup)) throw PathBlowup(t + h);
      path.degeneracy[k] += 0.5 * h * (degeneracy_density(x[k]) + degeneracy_density(next[k]));
    }
    x = std::move(next);
    t = landing ? stop : t + h;
    track_sup(x);
    flush(t);
  }
  return path;
}

struct SigmaCheck {
  bool vanishes_on_E = true;
  bool positive_inside = true;
  TypePair first_failure{};
};

/// Grid check of the two runtime-checkable conditions on sigma: zero on both
/// axes and strictly positive on the open quadrant, over [0, extent]^2.
inline SigmaCheck check_sigma(const NoiseCoefficient& sigma, double extent = 10.0, int points = 41) {
  SigmaCheck r;
  for (int a = 0; a < points; ++a) {
    const double s = extent * a / (points - 1);
    for (const TypePair p : {TypePair{s, 0.0}, TypePair{0.0, s}}) {
      if (sigma(p) != 0.0 && r.vanishes_on_E) {
        r.vanishes_on_E = false;
        r.first_failure = p;
      }
    }
    for (int b = 1; b < points; ++b) {
      if (a == 0) break;
      const TypePair p{s, extent * b / (points - 1)};
      if (!(sigma(p) > 0.0) && r.positive_inside) {
        r.positive_inside = false;
        if (r.vanishes_on_E) r.first_failure = p;
      }
    }
  }
  return r;
}

}  // namespace catalytic
