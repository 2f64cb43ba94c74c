#pragma once

// Two-type configurations over a finite site window, the lozenge product and
// the exponential duality function built on it.

#include <complex>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace catalytic {

using Complex = std::complex<double>;
using Site = std::size_t;

struct TypePair {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const TypePair&, const TypePair&) = default;
};

/// True iff the pair lies on E = [0,inf)^2 \ (0,inf)^2, i.e. x1 * x2 == 0
/// with no tolerance.
inline bool on_boundary(const TypePair& p) noexcept {
  return p.x1 >= 0.0 && p.x2 >= 0.0 && (p.x1 == 0.0 || p.x2 == 0.0);
}

inline TypePair swapped(const TypePair& p) noexcept { return {p.x2, p.x1}; }

/// Dense state over the window S_m; site k is array index k.
///
/// When `e_constrained` is set every site must hold an E-valued pair. The
/// infinite-rate simulator maintains this by writing literal zeros, so the
/// check is exact. Finite-rate states leave the flag off.
struct Config {
  std::vector<TypePair> values;
  bool e_constrained = false;

  Config() = default;
  explicit Config(std::size_t n, bool constrained = false)
      : values(n), e_constrained(constrained) {}
  Config(std::vector<TypePair> v, bool constrained)
      : values(std::move(v)), e_constrained(constrained) {}

  std::size_t size() const noexcept { return values.size(); }
  TypePair& operator[](Site k) { return values[k]; }
  const TypePair& operator[](Site k) const { return values[k]; }

  std::vector<double> type(int i) const {
    std::vector<double> out(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
      out[k] = i == 1 ? values[k].x1 : values[k].x2;
    return out;
  }

  friend bool operator==(const Config&, const Config&) = default;
};

/// Finite-support dual state. Stored densely over the same window; sites
/// outside the support hold (0,0).
struct DualConfig {
  std::vector<TypePair> values;

  DualConfig() = default;
  explicit DualConfig(std::size_t n) : values(n) {}
  explicit DualConfig(std::vector<TypePair> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  TypePair& operator[](Site k) { return values[k]; }
  const TypePair& operator[](Site k) const { return values[k]; }

  std::vector<Site> support() const {
    std::vector<Site> s;
    for (Site k = 0; k < values.size(); ++k)
      if (values[k].x1 != 0.0 || values[k].x2 != 0.0) s.push_back(k);
    return s;
  }

  Config as_config() const { return Config(values, true); }

  friend bool operator==(const DualConfig&, const DualConfig&) = default;
};

/// a <> b = -(a1+a2)(b1+b2) + i (a1-a2)(b1-b2)
inline Complex lozenge(const TypePair& a, const TypePair& b) noexcept {
  return {-(a.x1 + a.x2) * (b.x1 + b.x2), (a.x1 - a.x2) * (b.x1 - b.x2)};
}

/// <<x, y>> = sum_k x(k) <> y(k). Throws if y carries mass outside x's window.
inline Complex pairing(const std::vector<TypePair>& x, const std::vector<TypePair>& y) {
  Complex sum{0.0, 0.0};
  for (Site k = 0; k < y.size(); ++k) {
    const TypePair& yk = y[k];
    if (yk.x1 == 0.0 && yk.x2 == 0.0) continue;
    if (k >= x.size())
      throw std::domain_error("pairing: dual support site " + std::to_string(k) +
                              " lies outside the window of size " + std::to_string(x.size()));
    sum += lozenge(x[k], yk);
  }
  return sum;
}

inline Complex pairing(const Config& x, const DualConfig& y) { return pairing(x.values, y.values); }

/// H(x, y) = exp(<<x, y>>); |H| <= 1 for nonnegative arguments.
inline Complex duality_H(const Config& x, const DualConfig& y) { return std::exp(pairing(x, y)); }

/// sum_k |u(k)| beta(k)
inline double beta_norm(const std::vector<double>& u, const std::vector<double>& beta) {
  if (beta.size() < u.size()) throw std::invalid_argument("beta_norm: beta does not cover the window");
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::abs(u[k]) * beta[k];
  return s;
}

inline bool validate_E(const Config& x) noexcept {
  for (const auto& p : x.values)
    if (!on_boundary(p)) return false;
  return true;
}

inline bool all_finite_nonnegative(const Config& x) noexcept {
  for (const auto& p : x.values)
    if (!(std::isfinite(p.x1) && std::isfinite(p.x2) && p.x1 >= 0.0 && p.x2 >= 0.0)) return false;
  return true;
}

}  // namespace catalytic
