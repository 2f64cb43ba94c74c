#pragma once

// The harmonic exit measure Q of planar Brownian motion from the open quadrant
// and the sigma-finite jump measure nu on E it produces in the vague limit
// eps^{-1} Q_{(1,eps)}.
//
// nu has the one-dimensional density
//   (4/pi) u / ((1-u)^2 (1+u)^2) du   on the u-axis {(u,0)},
//   (4/pi) v / (1+v^2)^2 dv           on the v-axis {(0,v)},
// with a non-integrable singularity at (1,0). Closed forms below are checked
// against direct quadrature of these densities (the `nu_quadrature`
// namespace), which never calls the closed forms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "core_state.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace catalytic {

inline constexpr double kPi = std::numbers::pi;

enum class Axis { U, V };

/// A point of E: (coord, 0) on the u-axis or (0, coord) on the v-axis.
/// The origin is always stored on the u-axis.
struct BoundaryPoint {
  Axis branch = Axis::U;
  double coord = 0.0;

  BoundaryPoint() = default;
  BoundaryPoint(Axis b, double c) : branch(c == 0.0 ? Axis::U : b), coord(c) {
    if (!(c >= 0.0)) throw std::domain_error("BoundaryPoint: coordinate must be nonnegative");
  }

  TypePair pair() const noexcept { return branch == Axis::U ? TypePair{coord, 0.0} : TypePair{0.0, coord}; }

  /// +coord on the u-axis, -coord on the v-axis; a single real line for
  /// distributional comparisons.
  double signed_coord() const noexcept { return branch == Axis::U ? coord : -coord; }

  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;
};

inline BoundaryPoint from_pair(const TypePair& p) {
  if (!on_boundary(p)) throw std::domain_error("point is not on E");
  return p.x2 == 0.0 ? BoundaryPoint(Axis::U, p.x1) : BoundaryPoint(Axis::V, p.x2);
}

// --- density and closed forms -----------------------------------------------

inline double nu_density_u(double u) noexcept {
  if (u == 1.0) return std::numeric_limits<double>::infinity();
  const double d = (1.0 - u) * (1.0 + u);
  return 4.0 / kPi * u / (d * d);
}

inline double nu_density_v(double v) noexcept {
  const double d = 1.0 + v * v;
  return 4.0 / kPi * v / (d * d);
}

/// Density of nu at y; the singular point (1,0) evaluates to +infinity.
inline double nu_density(const BoundaryPoint& y) noexcept {
  return y.branch == Axis::U ? nu_density_u(y.coord) : nu_density_v(y.coord);
}

/// {|y1-1| >= delta, y2 = 0} union {y2 >= delta}
struct NuRegion {
  double delta;
  explicit NuRegion(double d) : delta(d) {
    if (!(d > 0.0)) throw std::domain_error("NuRegion: delta must be positive");
  }
};

struct NuRegionMass {
  double u_lower = 0.0;  ///< nu{(u,0): u <= 1-delta}
  double u_upper = 0.0;  ///< nu{(u,0): u >= 1+delta}
  double v = 0.0;        ///< nu{(0,v): v >= delta}

  double u() const noexcept { return u_lower + u_upper; }
  double total() const noexcept { return u_lower + u_upper + v; }
};

inline void require_positive_delta(double delta) {
  if (!(delta > 0.0)) throw std::domain_error("delta must be positive");
}

/// Antiderivative of the u-density is (2/pi) / (1-u^2), which gives each
/// branch directly. The v-tail is (2/pi)/(1+delta^2) by w = 1+v^2.
inline NuRegionMass nu_region_mass(const NuRegion& region) {
  const double d = region.delta;
  NuRegionMass m;
  m.u_upper = 2.0 / kPi / (d * (2.0 + d));
  m.u_lower = d < 1.0 ? 2.0 / kPi * (1.0 - d) * (1.0 - d) / (d * (2.0 - d)) : 0.0;
  m.v = 2.0 / kPi / (1.0 + d * d);
  return m;
}

/// u-axis tail mass in the two-branch form (8/pi)/(d(4-d^2)) - 2/pi for d <= 1
/// and (2/pi)/(d(2+d)) for d >= 1.
inline double nu_u_tail_mass(double delta) {
  require_positive_delta(delta);
  if (delta <= 1.0) return 8.0 / kPi / (delta * (4.0 - delta * delta)) - 2.0 / kPi;
  return 2.0 / kPi / (delta * (2.0 + delta));
}

inline double nu_v_tail_mass(double delta) {
  require_positive_delta(delta);
  return 2.0 / kPi / (1.0 + delta * delta);
}

/// The printed variant (2/pi)/(1+delta)^2 of the v-tail. It disagrees with the
/// density; kept only so the oracle table can show the discrepancy.
inline double nu_v_tail_mass_printed(double delta) {
  require_positive_delta(delta);
  return 2.0 / kPi / ((1.0 + delta) * (1.0 + delta));
}

enum class MomentKind { Symmetric, Upper };

/// Symmetric: integral over {|y1-1| >= delta} of (y1-1) d nu. For delta <= 1
/// that set contains the whole v-axis (y1 = 0), contributing -2/pi.
/// Upper: integral over {y1-1 >= delta}.
inline double nu_signed_first_moment(MomentKind kind, double delta) {
  require_positive_delta(delta);
  const double d = delta;
  const double upper = std::log1p(2.0 / d) / kPi + 2.0 / kPi / (2.0 + d);
  if (kind == MomentKind::Upper || d > 1.0) return upper;
  return std::log((2.0 + d) / (2.0 - d)) / kPi - 4.0 / kPi * d / (4.0 - d * d);
}

/// integral of y2 d nu; the u-axis contributes nothing.
inline constexpr double nu_mean_y2() noexcept { return 1.0; }

/// c1(delta) = integral over the jump region of (y1-1) d nu, i.e. the u-axis
/// first moment outside (1-delta, 1+delta) minus the v-tail mass. The
/// present type's between-jump drift carries -c1(eps/z) times the incoming
/// flow of the absent type. |c1| <= 4/pi.
inline double compensator_coefficient(double delta) {
  require_positive_delta(delta);
  const double u_moment = delta <= 1.0 ? nu_signed_first_moment(MomentKind::Symmetric, delta) + 2.0 / kPi
                                       : nu_signed_first_moment(MomentKind::Upper, delta);
  return u_moment - nu_v_tail_mass(delta);
}

/// Upper bound (4/pi)(p^2-2p+2)/(p(p-1)(2-p)) on m_p = integral |y1-1|^p d nu.
inline double mp_bound(double p) {
  if (!(p > 1.0 && p < 2.0)) throw std::domain_error("mp_bound: p must lie in (1,2)");
  return 4.0 / kPi * (p * p - 2.0 * p + 2.0) / (p * (p - 1.0) * (2.0 - p));
}

// --- samplers ---------------------------------------------------------------

/// v given v >= delta, from the CDF value p: the conditional tail is
/// (1+delta^2)/(1+v^2).
inline double nu_v_inverse(double delta, double p) { return std::sqrt((1.0 + delta * delta) / (1.0 - p) - 1.0); }

/// u given u >= 1+delta, from the tail probability p: the conditional tail is
/// ((1+delta)^2 - 1)/(u^2 - 1).
inline double nu_u_upper_inverse(double delta, double p) {
  const double a = 1.0 + delta;
  return std::sqrt(1.0 + (a * a - 1.0) / p);
}

/// u given u <= 1-delta, from the CDF value p. On [0,b] the cumulative mass is
/// (2/pi) u^2/(1-u^2), so u^2/(1-u^2) = p r with r = b^2/(1-b^2).
inline double nu_u_lower_inverse(double delta, double p) {
  const double b = 1.0 - delta;
  const double r = b * b / (1.0 - b * b);
  const double pr = p * r;
  return std::sqrt(pr / (1.0 + pr));
}

/// Draw from nu restricted to the region, normalised.
inline BoundaryPoint sample_nu(const NuRegion& region, RandomStream& rng) {
  const NuRegionMass m = nu_region_mass(region);
  const double pick = rng.uniform() * m.total();
  const double p = rng.uniform();
  if (pick < m.v) return {Axis::V, nu_v_inverse(region.delta, p)};
  if (pick < m.v + m.u_upper) return {Axis::U, nu_u_upper_inverse(region.delta, p)};
  return {Axis::U, nu_u_lower_inverse(region.delta, p)};
}

/// Exit point of planar Brownian motion from (0,inf)^2 started at (u,v),
/// driven by a single uniform p. z -> z^2 maps the quadrant onto the upper
/// half-plane, where the exit law from u^2-v^2 + i 2uv is Cauchy with that
/// location and scale; C >= 0 pulls back to (sqrt C, 0), C < 0 to (0, sqrt -C).
inline BoundaryPoint harmonic_exit_from_uniform(double u, double v, double p) {
  if (!(u >= 0.0 && v >= 0.0)) throw std::domain_error("harmonic exit: start must lie in the closed quadrant");
  if (u == 0.0 || v == 0.0) return from_pair({u, v});
  const double c = u * u - v * v + 2.0 * u * v * std::tan(kPi * (p - 0.5));
  return c >= 0.0 ? BoundaryPoint(Axis::U, std::sqrt(c)) : BoundaryPoint(Axis::V, std::sqrt(-c));
}

inline BoundaryPoint sample_harmonic_exit(double u, double v, RandomStream& rng) {
  if (!(u >= 0.0 && v >= 0.0)) throw std::domain_error("harmonic exit: start must lie in the closed quadrant");
  if (u == 0.0 || v == 0.0) return from_pair({u, v});
  return harmonic_exit_from_uniform(u, v, rng.uniform());
}

/// P(signed exit coordinate <= s) under Q_{(u,v)}.
inline double harmonic_exit_signed_cdf(double u, double v, double s) {
  const double c = s >= 0.0 ? s * s : -s * s;
  return 0.5 + std::atan((c - (u * u - v * v)) / (2.0 * u * v)) / kPi;
}

/// Probability of leaving through the u-axis.
inline double harmonic_exit_u_probability(double u, double v) {
  return 0.5 + std::atan((u * u - v * v) / (2.0 * u * v)) / kPi;
}

struct BrownianExitOptions {
  /// Increment standard deviation is max(sqrt(step), ratio * distance to E).
  /// 0 gives fixed increments of variance `step` everywhere.
  double adaptive_ratio = 0.2;
  std::size_t max_steps = 500'000'000;
};

/// Brute-force exit oracle: Gaussian increments until a coordinate reaches 0.
/// Far from the boundary the time step grows with the distance to E (exact
/// Gaussian increments, crossing probability per step ~ 2 Phi(-1/ratio));
/// within sqrt(step)/ratio of E every increment has variance `step`.
/// The crossing is located by linear interpolation between the last two
/// positions and projected onto the crossed axis.
inline BoundaryPoint bm_exit_oracle(double u, double v, double step, RandomStream& rng,
                                    const BrownianExitOptions& opt = {}) {
  if (!(u >= 0.0 && v >= 0.0)) throw std::domain_error("bm_exit_oracle: start must lie in the closed quadrant");
  if (!(step > 0.0)) throw std::domain_error("bm_exit_oracle: step must be positive");
  if (u == 0.0 || v == 0.0) return from_pair({u, v});
  const double base = std::sqrt(step);
  double x = u;
  double y = v;
  for (std::size_t n = 0; n < opt.max_steps; ++n) {
    const double sd = std::max(base, opt.adaptive_ratio * std::min(x, y));
    const double nx = x + sd * rng.normal();
    const double ny = y + sd * rng.normal();
    if (nx > 0.0 && ny > 0.0) {
      x = nx;
      y = ny;
      continue;
    }
    const double fx = nx <= 0.0 ? x / (x - nx) : 2.0;
    const double fy = ny <= 0.0 ? y / (y - ny) : 2.0;
    if (fx <= fy) return {Axis::V, std::max(0.0, y + fx * (ny - y))};
    return {Axis::U, std::max(0.0, x + fy * (nx - x))};
  }
  throw NumericalError("bm_exit_oracle: no exit within the step budget");
}

// --- harmonicity integral -----------------------------------------------------

namespace detail {

/// (e^a - 1 - a) / a^2, stable for small |a|.
inline Complex exp_remainder_over_sq(Complex a) {
  if (std::abs(a) < 1e-2) {
    Complex term{0.5, 0.0};
    Complex sum = term;
    for (int k = 3; k < 12; ++k) {
      term *= a / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(a) - 1.0 - a) / (a * a);
}

}  // namespace detail

/// J(z, x) for z, x in E: J_i = z2 x_{3-i} + (z1 - 1) x_i.
inline TypePair jump_vector(const TypePair& z, const TypePair& x) noexcept {
  return {z.x2 * x.x2 + (z.x1 - 1.0) * x.x1, z.x2 * x.x1 + (z.x1 - 1.0) * x.x2};
}

/// h_{x,y}(z) = exp(J(z,x) <> y) - 1 - J(z,x) <> y
inline Complex h_xy(const TypePair& z, const TypePair& x, const TypePair& y) {
  const Complex a = lozenge(jump_vector(z, x), y);
  return std::exp(a) - 1.0 - a;
}

struct ComplexQuad {
  Complex value;
  double error = 0.0;
};

/// Quadrature of h_{x,y} against nu over both axes. The u-axis integrand is
/// written as (4/pi) u/(1+u)^2 * g(a) * (x<>y)^2 with a = (u-1)(x<>y) and
/// g(a) = (e^a-1-a)/a^2, which is bounded through u = 1.
inline ComplexQuad h_integral_check(const TypePair& x, const TypePair& y) {
  if (!on_boundary(x)) throw std::domain_error("h_integral_check: x must lie on E");
  if (!(y.x1 >= 0.0 && y.x2 >= 0.0) || y.x1 + y.x2 <= 0.0)
    throw std::domain_error("h_integral_check: y must be nonnegative and nonzero");
  if (x.x1 == 0.0 && x.x2 == 0.0) return {};
  const Complex w = lozenge(x, y);
  auto u_part = [&](double u) {
    return 4.0 / kPi * u / ((1.0 + u) * (1.0 + u)) * detail::exp_remainder_over_sq((u - 1.0) * w) * w * w;
  };
  auto v_part = [&](double v) { return nu_density_v(v) * h_xy({0.0, v}, x, y); };
  ComplexQuad out;
  const double tol = 1e-10;
  auto run = [&](auto&& f, double a, double b) {
    const auto re = quad::gauss_kronrod([&](double t) { return f(t).real(); }, a, b, tol);
    const auto im = quad::gauss_kronrod([&](double t) { return f(t).imag(); }, a, b, tol);
    out.value += Complex{re.value, im.value};
    out.error += re.error + im.error;
  };
  run(u_part, 0.0, 1.0);
  run(u_part, 1.0, std::numeric_limits<double>::infinity());
  run(v_part, 0.0, std::numeric_limits<double>::infinity());
  return out;
}

// --- quadrature counterparts of the closed forms -------------------------------

namespace nu_quadrature {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline QuadResult u_lower_mass(double delta) {
  if (delta >= 1.0) return {};
  return quad::gauss_kronrod(nu_density_u, 0.0, 1.0 - delta);
}

inline QuadResult u_upper_mass(double delta) { return quad::gauss_kronrod(nu_density_u, 1.0 + delta, kInf); }

inline QuadResult u_tail_mass(double delta) {
  QuadResult r = u_lower_mass(delta);
  r += u_upper_mass(delta);
  return r;
}

inline QuadResult v_tail_mass(double delta) { return quad::gauss_kronrod(nu_density_v, delta, kInf); }

inline QuadResult first_moment(MomentKind kind, double delta) {
  auto f = [](double u) { return (u - 1.0) * nu_density_u(u); };
  QuadResult r = quad::gauss_kronrod(f, 1.0 + delta, kInf);
  if (kind == MomentKind::Symmetric) {
    if (delta < 1.0) r += quad::gauss_kronrod(f, 0.0, 1.0 - delta);
    if (delta <= 1.0) {
      // every v-axis point has |y1 - 1| = 1 >= delta and y1 - 1 = -1
      QuadResult v = quad::gauss_kronrod(nu_density_v, 0.0, kInf);
      r.value -= v.value;
      r.error += v.error;
    }
  }
  return r;
}

inline QuadResult mean_y2() {
  return quad::gauss_kronrod([](double v) { return v * nu_density_v(v); }, 0.0, kInf);
}

/// Integral over the jump region of (y1 - 1) d nu, assembled panel by panel.
inline QuadResult compensator(double delta) {
  auto f = [](double u) { return (u - 1.0) * nu_density_u(u); };
  QuadResult r = quad::gauss_kronrod(f, 1.0 + delta, kInf);
  if (delta < 1.0) r += quad::gauss_kronrod(f, 0.0, 1.0 - delta);
  QuadResult v = quad::gauss_kronrod(nu_density_v, delta, kInf);
  r.value -= v.value;
  r.error += v.error;
  return r;
}

/// m_p = integral |y1-1|^p d nu. The u-axis integrand (4/pi) u |u-1|^{p-2}/(1+u)^2
/// is singular at u = 1 and decays like u^{p-3}; the substitutions
/// w = |u-1|^{p-1} on [0,2] and w = (u-1)^{p-2} on [2,inf) turn every panel
/// into a bounded integrand on [0,1].
inline QuadResult mp(double p) {
  if (!(p > 1.0 && p < 2.0)) throw std::domain_error("m_p: p must lie in (1,2)");
  auto shape = [](double u) { return 4.0 / kPi * u / ((1.0 + u) * (1.0 + u)); };
  const double a = 1.0 / (p - 1.0);
  auto below = [&](double w) { return shape(1.0 - std::pow(w, a)) / (p - 1.0); };
  auto above = [&](double w) { return shape(1.0 + std::pow(w, a)) / (p - 1.0); };
  const double b = 1.0 / (p - 2.0);
  auto tail = [&](double w) {
    const double um1 = std::pow(w, b);
    return shape(1.0 + um1) * um1 / (2.0 - p);
  };
  QuadResult r = quad::gauss_kronrod(below, 0.0, 1.0, 1e-10);
  r += quad::gauss_kronrod(above, 0.0, 1.0, 1e-10);
  r += quad::gauss_kronrod(tail, 0.0, 1.0, 1e-10);
  r += quad::gauss_kronrod(nu_density_v, 0.0, kInf);  // |0 - 1|^p = 1 on the v-axis
  return r;
}

}  // namespace nu_quadrature
}  // namespace catalytic
