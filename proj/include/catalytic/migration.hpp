#pragma once

// Migration kernel A on the window: validation, Liggett-Spitzer weights and
// the semigroups e^{tA} and e^{t|A|}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "core_state.hpp"
#include "format.hpp"

namespace catalytic {

class MatrixValidationError : public std::invalid_argument {
 public:
  MatrixValidationError(std::size_t k, std::size_t l, double value)
      : std::invalid_argument("migration matrix: negative off-diagonal entry A(" + std::to_string(k) + "," +
                              std::to_string(l) + ") = " + format_double(value)),
        row(k),
        col(l) {}
  std::size_t row;
  std::size_t col;
};

/// Dense square kernel over the window. ||A|| = sup_k sum_l |A(k,l)| + |A(l,k)|
/// is computed on construction.
class MigrationMatrix {
 public:
  MigrationMatrix() = default;
  MigrationMatrix(std::size_t n, std::vector<double> entries) : n_(n), a_(std::move(entries)) {
    if (a_.size() != n_ * n_) throw std::invalid_argument("migration matrix: entries must form an n x n array");
    for (double v : a_)
      if (!std::isfinite(v)) throw std::invalid_argument("migration matrix: non-finite entry");
    norm_ = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < n_; ++l) s += std::abs((*this)(k, l)) + std::abs((*this)(l, k));
      norm_ = std::max(norm_, s);
    }
  }

  static MigrationMatrix zero(std::size_t n) { return MigrationMatrix(n, std::vector<double>(n * n, 0.0)); }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t k, std::size_t l) const { return a_[k * n_ + l]; }
  double norm() const noexcept { return norm_; }
  const std::vector<double>& entries() const noexcept { return a_; }

  MigrationMatrix transpose() const {
    std::vector<double> t(n_ * n_);
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t l = 0; l < n_; ++l) t[l * n_ + k] = a_[k * n_ + l];
    return MigrationMatrix(n_, std::move(t));
  }

  MigrationMatrix absolute() const {
    std::vector<double> t(a_);
    for (double& v : t) v = std::abs(v);
    return MigrationMatrix(n_, std::move(t));
  }

  bool is_zero() const noexcept {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return v == 0.0; });
  }

  std::vector<double> apply(const std::vector<double>& f) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      double s = 0.0;
      const double* row = &a_[k * n_];
      for (std::size_t l = 0; l < n_; ++l) s += row[l] * f[l];
      out[k] = s;
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
  double norm_ = 0.0;
};

/// Off-diagonal entries must be nonnegative. Throws MatrixValidationError
/// naming the first offending (k,l) in row-major order.
inline void validate_matrix(const MigrationMatrix& A) {
  for (std::size_t k = 0; k < A.size(); ++k)
    for (std::size_t l = 0; l < A.size(); ++l)
      if (k != l && A(k, l) < 0.0) throw MatrixValidationError(k, l, A(k, l));
}

struct BetaWeights {
  std::vector<double> beta;
  double M = 1.0;
};

/// Largest violation of sum_l beta(l) (|A(k,l)| + |A(l,k)|) <= M beta(k),
/// relative to M beta(k). Nonpositive means the weights are admissible.
inline double beta_condition_excess(const MigrationMatrix& A, const BetaWeights& w) {
  double worst = -INFINITY;
  for (std::size_t k = 0; k < A.size(); ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < A.size(); ++l) s += w.beta[l] * (std::abs(A(k, l)) + std::abs(A(l, k)));
    worst = std::max(worst, (s - w.M * w.beta[k]) / (w.M * w.beta[k]));
  }
  return A.size() == 0 ? 0.0 : worst;
}

inline bool verify_beta(const MigrationMatrix& A, const BetaWeights& w) {
  if (w.beta.size() != A.size() || !(w.M > 0.0)) return false;
  for (double b : w.beta)
    if (!(b > 0.0) || !std::isfinite(b)) return false;
  // The construction gives B beta = c (beta - seed) exactly; allow rounding.
  return beta_condition_excess(A, w) <= 1e-12;
}

/// beta = sum_n c^{-n} B^n seed with B(k,l) = |A(k,l)| + |A(l,k)|, c = 2||A||
/// (1 when A = 0) and a uniform seed 1/n. Row sums of B are at most c/2 so the
/// series converges geometrically, and B beta = c (beta - seed) <= c beta.
/// M is c raised to at least 1.
inline BetaWeights find_beta(const MigrationMatrix& A) {
  const std::size_t n = A.size();
  BetaWeights w;
  const double c = A.norm() > 0.0 ? 2.0 * A.norm() : 1.0;
  w.M = std::max(1.0, c);
  std::vector<double> B(n * n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) B[k * n + l] = std::abs(A(k, l)) + std::abs(A(l, k));

  std::vector<double> term(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  w.beta = term;
  if (A.norm() == 0.0) return w;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> next(n, 0.0);
    double mx = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < n; ++l) s += B[k * n + l] * term[l];
      next[k] = s / c;
      mx = std::max(mx, next[k]);
    }
    for (std::size_t k = 0; k < n; ++k) w.beta[k] += next[k];
    term = std::move(next);
    if (mx < 1e-18) break;
  }
  return w;
}

namespace detail {

/// e^{tA} f by splitting t into s pieces with ||tA||/s <= 1/2 and applying a
/// truncated Taylor series per piece. With theta <= 1/2 the Lagrange remainder
/// after order m is at most theta^{m+1} e^theta / (m+1)!; m is the smallest
/// order pushing that below 1e-17 per piece.
inline std::vector<double> expm_action(const MigrationMatrix& A, double t, std::vector<double> f) {
  if (t < 0.0) throw std::domain_error("semigroup: t must be nonnegative");
  if (t == 0.0 || A.norm() == 0.0) return f;
  const double scaled = A.norm() * t;
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(scaled / 0.5)));
  const double h = t / static_cast<double>(pieces);
  const double theta = scaled / static_cast<double>(pieces);
  int order = 0;
  double bound = theta * std::exp(theta);
  while (bound > 1e-17 && order < 60) {
    ++order;
    bound *= theta / static_cast<double>(order + 1);
  }
  for (std::size_t p = 0; p < pieces; ++p) {
    std::vector<double> term = f;
    std::vector<double> sum = f;
    for (int j = 1; j <= order; ++j) {
      term = A.apply(term);
      const double c = h / static_cast<double>(j);
      for (std::size_t k = 0; k < term.size(); ++k) {
        term[k] *= c;
        sum[k] += term[k];
      }
    }
    f = std::move(sum);
  }
  return f;
}

}  // namespace detail

/// S_t f = e^{tA} f
inline std::vector<double> semigroup_apply(const MigrationMatrix& A, double t, const std::vector<double>& f) {
  return detail::expm_action(A, t, f);
}

/// e^{t|A|} f; dominates both f and e^{tA} f entrywise for f >= 0.
inline std::vector<double> bold_apply(const MigrationMatrix& A, double t, const std::vector<double>& f) {
  return detail::expm_action(A.absolute(), t, f);
}

/// (A x_i)(k) over the window.
inline std::vector<double> drift_apply(const MigrationMatrix& A, const Config& x, int type_index) {
  if (type_index != 1 && type_index != 2) throw std::invalid_argument("drift_apply: type must be 1 or 2");
  return A.apply(x.type(type_index));
}

// --- generators and parsers -------------------------------------------------

/// Nearest-neighbour walk on a cycle of n sites minus the identity:
/// A(k,l) = a(k,l) - 1{k=l} with a(k,k+1) = p_right, a(k,k-1) = 1 - p_right.
/// p_right = 1/2 gives the symmetric kernel; on two sites that is [[-1,1],[1,-1]].
inline MigrationMatrix cycle_kernel(std::size_t n, double p_right = 0.5) {
  if (n == 0) throw std::invalid_argument("cycle_kernel: need at least one site");
  if (!(p_right >= 0.0 && p_right <= 1.0)) throw std::invalid_argument("cycle_kernel: p_right must lie in [0,1]");
  std::vector<double> a(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    a[k * n + (k + 1) % n] += p_right;
    a[k * n + (k + n - 1) % n] += 1.0 - p_right;
    a[k * n + k] -= 1.0;
  }
  return MigrationMatrix(n, std::move(a));
}

/// Dense CSV rows, one matrix row per line.
inline MigrationMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> r;
    while (std::getline(row, cell, ',')) r.push_back(parse_double(cell));
    rows.push_back(std::move(r));
  }
  const std::size_t n = rows.size();
  std::vector<double> a;
  for (std::size_t k = 0; k < n; ++k) {
    if (rows[k].size() != n)
      throw std::invalid_argument("matrix csv: row " + std::to_string(k) + " has " + std::to_string(rows[k].size()) +
                                  " entries, expected " + std::to_string(n));
    a.insert(a.end(), rows[k].begin(), rows[k].end());
  }
  return MigrationMatrix(n, std::move(a));
}

/// Sparse triples [[k,l,value],...] or {"size":n,"entries":[[k,l,value],...]}.
/// Without an explicit size the window is the largest index + 1, or `n_hint`.
inline MigrationMatrix matrix_from_json(const std::string& text, std::size_t n_hint = 0) {
  const auto j = nlohmann::json::parse(text);
  const nlohmann::json& triples = j.is_object() ? j.at("entries") : j;
  std::size_t n = j.is_object() && j.contains("size") ? j.at("size").get<std::size_t>() : n_hint;
  if (!triples.is_array()) throw std::invalid_argument("matrix json: expected a list of [k,l,value] triples");
  for (const auto& t : triples) {
    if (!t.is_array() || t.size() != 3) throw std::invalid_argument("matrix json: each entry must be [k,l,value]");
    n = std::max({n, t[0].get<std::size_t>() + 1, t[1].get<std::size_t>() + 1});
  }
  std::vector<double> a(n * n, 0.0);
  for (const auto& t : triples) a[t[0].get<std::size_t>() * n + t[1].get<std::size_t>()] += t[2].get<double>();
  return MigrationMatrix(n, std::move(a));
}

}  // namespace catalytic
