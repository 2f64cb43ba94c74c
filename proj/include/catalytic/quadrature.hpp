#pragma once

// Globally adaptive Gauss-Kronrod quadrature on finite and semi-infinite
// panels with a hard absolute error budget.

#include <cmath>
#include <functional>
#include <queue>
#include <limits>
#include <stdexcept>
#include <string>


#include "format.hpp"

namespace catalytic {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

inline QuadResult& operator+=(QuadResult& a, const QuadResult& b) {
  a.value += b.value;
  a.error += b.error;
  return a;
}

namespace quad {

inline constexpr double kAbsTol = 1e-12;

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1,1] (QUADPACK qk15).
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod on [a,b]; b may be +infinity, in which case
/// x = a + (1-t)/t maps the range onto (0,1]. The panel with the largest
/// |K15 - G7| is bisected until the summed estimate drops below `abs_tol`.
template <class F>
QuadResult gauss_kronrod(F&& f, double a, double b, double abs_tol = kAbsTol, std::size_t max_panels = 20000) {
  if (a == b) return {};
  std::function<double(double)> g;
  double lo = a, hi = b;
  if (std::isinf(b)) {
    g = [&f, a](double t) { return f(a + (1.0 - t) / t) / (t * t); };
    lo = 0.0;
    hi = 1.0;
  } else {
    g = [&f](double x) { return static_cast<double>(f(x)); };
  }
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15(g, lo, hi));
  double total = heap.top().value;
  double err = heap.top().error;
  while (err > abs_tol && heap.size() < max_panels) {
    const detail::Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    const detail::Panel l = detail::gk15(g, p.a, mid);
    const detail::Panel r = detail::gk15(g, mid, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    if (!std::isfinite(total)) break;
  }
  // Recompute from panels to shed accumulated rounding in the running sums.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total) || err > abs_tol)
    throw NumericalError("quadrature did not converge on [" + format_double(a) + "," + format_double(b) +
                         "]: value " + format_double(total) + ", error estimate " + format_double(err) +
                         ", tolerance " + format_double(abs_tol));
  return {total, err};
}

}  // namespace quad
}  // namespace catalytic
