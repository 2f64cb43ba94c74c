#pragma once

// Monte Carlo estimates with a fixed reduction tree, replicate fan-out, and
// the goodness-of-fit tests used by the distributional checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "core_state.hpp"

namespace catalytic {

/// Count, means and centred second moments of a complex sample. merge() is
/// Chan's pairwise update, so a fixed merge order gives bit-identical output.
struct Moments {
  double n = 0.0;
  double mean_re = 0.0, mean_im = 0.0;
  double m2_re = 0.0, m2_im = 0.0;

  static Moments of(Complex v) { return {1.0, v.real(), v.imag(), 0.0, 0.0}; }

  static Moments merge(const Moments& a, const Moments& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Moments r;
    r.n = a.n + b.n;
    const double dre = b.mean_re - a.mean_re;
    const double dim = b.mean_im - a.mean_im;
    r.mean_re = a.mean_re + dre * b.n / r.n;
    r.mean_im = a.mean_im + dim * b.n / r.n;
    r.m2_re = a.m2_re + b.m2_re + dre * dre * a.n * b.n / r.n;
    r.m2_im = a.m2_im + b.m2_im + dim * dim * a.n * b.n / r.n;
    return r;
  }
};

/// Balanced binary tree over index order: [lo, mid) merged with [mid, hi).
inline Moments reduce_tree(const std::vector<Moments>& leaves, std::size_t lo, std::size_t hi) {
  if (hi <= lo) return {};
  if (hi - lo == 1) return leaves[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return Moments::merge(reduce_tree(leaves, lo, mid), reduce_tree(leaves, mid, hi));
}

struct Estimate {
  Complex mean{};
  double se_re = 0.0;
  double se_im = 0.0;
  double std_error = 0.0;  ///< sqrt(se_re^2 + se_im^2)
  std::size_t n_reps = 0;
};

inline Estimate estimate_from_moments(const Moments& m) {
  if (m.n < 2.0) throw std::domain_error("estimate needs at least 2 replicates for a variance");
  Estimate e;
  e.n_reps = static_cast<std::size_t>(m.n);
  e.mean = {m.mean_re, m.mean_im};
  e.se_re = std::sqrt(m.m2_re / (m.n - 1.0) / m.n);
  e.se_im = std::sqrt(m.m2_im / (m.n - 1.0) / m.n);
  e.std_error = std::hypot(e.se_re, e.se_im);
  return e;
}

inline Estimate estimate_of(const std::vector<Complex>& samples) {
  std::vector<Moments> leaves;
  leaves.reserve(samples.size());
  for (Complex v : samples) leaves.push_back(Moments::of(v));
  return estimate_from_moments(reduce_tree(leaves, 0, leaves.size()));
}

inline Estimate estimate_of(const std::vector<double>& samples) {
  std::vector<Complex> c(samples.begin(), samples.end());
  return estimate_of(c);
}

/// Runs fn(rep) for rep in [0, n) on up to `workers` threads (0: hardware
/// concurrency) and returns the results in replicate order. The first
/// exception thrown by any replicate is rethrown.
template <class Fn>
auto parallel_replicates(std::size_t n, Fn&& fn, unsigned workers = 0) {
  using T = decltype(fn(std::size_t{}));
  std::vector<T> out(n);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (std::size_t r = 0; r < n; ++r) out[r] = fn(r);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = next++; r < n; r = next++) out[r] = fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// --- goodness of fit ----------------------------------------------------------

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// lambda with P(K > lambda) = alpha, by bisection.
inline double kolmogorov_quantile(double alpha) {
  double lo = 0.2, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_survival(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct KsResult {
  double statistic = 0.0;  ///< sup |F_n - F|
  double p_value = 1.0;
  double critical = 0.0;   ///< D threshold at the requested alpha
  bool pass = true;
};

/// Stephens' small-sample correction of the asymptotic law.
inline double ks_effective_lambda(double d, double n_eff) {
  const double s = std::sqrt(n_eff);
  return (s + 0.12 + 0.11 / s) * d;
}

inline KsResult ks_finish(double d, double n_eff, double alpha) {
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival(ks_effective_lambda(d, n_eff));
  const double s = std::sqrt(n_eff);
  r.critical = kolmogorov_quantile(alpha) / (s + 0.12 + 0.11 / s);
  r.pass = r.p_value > alpha;
  return r;
}

/// One-sample KS against a continuous CDF.
inline KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf,
                              double alpha = 0.01) {
  if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return ks_finish(d, n, alpha);
}

/// Two-sample KS.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return ks_finish(d, na * nb / (na + nb), alpha);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool pass = true;
};

/// Pearson chi-square of observed counts against expected probabilities.
inline ChiSquareResult chi_square_test(const std::vector<double>& observed, const std::vector<double>& probs,
                                       double alpha = 0.01) {
  if (observed.size() != probs.size() || observed.size() < 2)
    throw std::invalid_argument("chi_square_test: need matching vectors with at least 2 cells");
  double n = 0.0;
  for (double o : observed) n += o;
  ChiSquareResult r;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double e = n * probs[c];
    if (!(e > 0.0)) throw std::invalid_argument("chi_square_test: expected count must be positive");
    r.statistic += (observed[c] - e) * (observed[c] - e) / e;
  }
  r.dof = static_cast<double>(observed.size() - 1);
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  r.pass = r.p_value > alpha;
  return r;
}

}  // namespace catalytic
