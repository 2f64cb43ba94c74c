#pragma once

// Experiment configuration, orchestration and CSV/manifest emission.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "config_io.hpp"
#include "core_state.hpp"
#include "duality.hpp"
#include "finite_rate.hpp"
#include "format.hpp"
#include "infinite_rate.hpp"
#include "jump_measure.hpp"
#include "migration.hpp"
#include "random.hpp"

namespace catalytic {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { Oracle, FiniteRate, InfiniteRate, Duality, GammaSweep, Moments };

inline const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Oracle: return "oracle";
    case ExperimentKind::FiniteRate: return "finite-rate";
    case ExperimentKind::InfiniteRate: return "infinite-rate";
    case ExperimentKind::Duality: return "duality";
    case ExperimentKind::GammaSweep: return "gamma-sweep";
    case ExperimentKind::Moments: return "moments";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Oracle, ExperimentKind::FiniteRate, ExperimentKind::InfiniteRate,
                 ExperimentKind::Duality, ExperimentKind::GammaSweep, ExperimentKind::Moments})
    if (s == kind_name(k)) return k;
  throw ConfigError("kind: unknown experiment '" + s + "'");
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Duality;
  std::string kernel = "cycle";  ///< "cycle" or "custom:<path>" (.csv dense or .json triples)
  std::size_t sites = 2;
  double p_right = 0.5;
  std::vector<TypePair> x0;  ///< empty: (1,0) at site 0, (0,1) at site 1
  std::vector<TypePair> y;   ///< empty: (0,1) at site 0
  double epsilon = 0.1;
  double T = 1.0;
  double t = 1.0;
  double ode_dt = 1e-3;
  double seed_mass_inv = 1e3;
  double gamma = 1.0;
  double dt = 0.0;  ///< finite-rate step; 0 keeps 1e-4 min(1, 1/gamma)
  std::vector<double> gammas{1.0, 10.0, 100.0, 1000.0};
  double grid_step = 0.05;
  double dt_scale = 0.0;
  std::size_t infinite_reps = 10000;
  std::vector<double> snapshots;  ///< empty: {T}
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::string output = "out";

  InfRateParams inf_params() const {
    InfRateParams p;
    p.epsilon = epsilon;
    p.T = T;
    p.ode_dt = std::min(ode_dt, T);
    p.seed_mass_inv = seed_mass_inv;
    return p;
  }

  std::vector<TypePair> initial() const {
    if (!x0.empty()) return x0;
    std::vector<TypePair> v(sites);
    v[0] = {1.0, 0.0};
    if (sites > 1) v[1] = {0.0, 1.0};
    return v;
  }

  std::vector<TypePair> dual_initial() const {
    if (!y.empty()) return y;
    std::vector<TypePair> v(sites);
    v[0] = {0.0, 1.0};
    return v;
  }

  std::vector<double> snapshot_times() const { return snapshots.empty() ? std::vector<double>{T} : snapshots; }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse_double(item));
    } catch (const std::exception&) {
      throw ConfigError(key + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

/// "x1,x2;x1,x2;..."
inline std::vector<TypePair> parse_pairs_text(const std::string& key, const std::string& text) {
  std::vector<TypePair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto v = parse_list(key, item);
    if (v.size() != 2) throw ConfigError(key + ": each site needs two masses, got '" + item + "'");
    out.push_back({v[0], v[1]});
  }
  return out;
}

inline double to_number(const std::string& key, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  }
}

inline std::size_t to_count(const std::string& key, const std::string& text) {
  const double v = to_number(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) throw ConfigError(key + ": expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline std::uint64_t to_seed(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) throw ConfigError(key + ": expected an unsigned 64-bit integer");
  return v;
}

/// Applies one key; values arrive as text (key=value) or as re-serialised JSON.
inline void apply_key(ExperimentConfig& c, const std::string& key, const nlohmann::json& value) {
  auto text = [&]() -> std::string { return value.is_string() ? value.get<std::string>() : value.dump(); };
  auto number = [&]() { return value.is_number() ? value.get<double>() : to_number(key, text()); };
  auto count = [&]() {
    if (value.is_number_unsigned() || value.is_number_integer()) {
      if (value.get<long long>() < 0) throw ConfigError(key + ": expected a nonnegative integer");
      return value.get<std::size_t>();
    }
    return to_count(key, text());
  };
  auto list = [&]() {
    if (value.is_array()) return value.get<std::vector<double>>();
    return parse_list(key, text());
  };
  auto pairs = [&]() {
    if (value.is_array()) {
      try {
        return pairs_from_json(value);
      } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
    return parse_pairs_text(key, text());
  };

  if (key == "kind") c.kind = parse_kind(text());
  else if (key == "kernel") c.kernel = text();
  else if (key == "sites") c.sites = count();
  else if (key == "p_right") c.p_right = number();
  else if (key == "x0") c.x0 = pairs();
  else if (key == "y") c.y = pairs();
  else if (key == "epsilon") c.epsilon = number();
  else if (key == "T") c.T = number();
  else if (key == "t") c.t = number();
  else if (key == "ode_dt") c.ode_dt = number();
  else if (key == "seed_mass_inv") c.seed_mass_inv = number();
  else if (key == "gamma") c.gamma = number();
  else if (key == "dt") c.dt = number();
  else if (key == "gammas") c.gammas = list();
  else if (key == "grid_step") c.grid_step = number();
  else if (key == "dt_scale") c.dt_scale = number();
  else if (key == "infinite_reps") c.infinite_reps = count();
  else if (key == "snapshots") c.snapshots = list();
  else if (key == "reps") c.reps = count();
  else if (key == "seed") c.seed = value.is_number_unsigned() ? value.get<std::uint64_t>() : to_seed(key, text());
  else if (key == "output") c.output = text();
  else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace detail

/// Positivity and window checks shared by both parsers and the CLI.
inline void validate_config(const ExperimentConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(key) + ": must be positive (got " + format_double(v) + ")");
  };
  auto nonneg = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(std::string(key) + ": must be nonnegative (got " + format_double(v) + ")");
  };
  positive("epsilon", c.epsilon);
  positive("T", c.T);
  positive("ode_dt", c.ode_dt);
  positive("seed_mass_inv", c.seed_mass_inv);
  nonneg("t", c.t);
  nonneg("gamma", c.gamma);
  nonneg("dt", c.dt);
  positive("grid_step", c.grid_step);
  nonneg("dt_scale", c.dt_scale);
  for (double g : c.gammas) nonneg("gammas", g);
  if (c.sites == 0) throw ConfigError("sites: must be at least 1");
  if (!(c.p_right >= 0.0 && c.p_right <= 1.0)) throw ConfigError("p_right: must lie in [0,1]");
  if (c.kernel != "cycle" && c.kernel.rfind("custom:", 0) != 0)
    throw ConfigError("kernel: expected 'cycle' or 'custom:<path>'");
  if (c.kernel == "cycle") {
    if (!c.x0.empty() && c.x0.size() != c.sites) throw ConfigError("x0: must list one pair per site");
    if (!c.y.empty() && c.y.size() != c.sites) throw ConfigError("y: must list one pair per site");
  }
  for (const auto& p : c.x0) {
    nonneg("x0", p.x1);
    nonneg("x0", p.x2);
  }
  for (const auto& p : c.y) {
    nonneg("y", p.x1);
    nonneg("y", p.x2);
  }
  for (double s : c.snapshots)
    if (s < 0.0 || s > c.T) throw ConfigError("snapshots: times must lie in [0, T]");
  if ((c.kind == ExperimentKind::Duality || c.kind == ExperimentKind::Moments ||
       c.kind == ExperimentKind::GammaSweep) &&
      c.reps < 2)
    throw ConfigError("reps: estimates need at least 2 replicates");
  if (c.kind == ExperimentKind::GammaSweep && c.infinite_reps < 2)
    throw ConfigError("infinite_reps: estimates need at least 2 replicates");
}

/// JSON object or `key = value` lines (# starts a comment). Unknown keys
/// are rejected; diagnostics name the key and, for text input, the line.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config json: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) detail::apply_key(c, it.key(), it.value());
  } else {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      try {
        detail::apply_key(c, trim(line.substr(0, eq)), nlohmann::json(trim(line.substr(eq + 1))));
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  validate_config(c);
  return c;
}

/// Canonical form: a JSON object with every key present, keys sorted,
/// numbers in shortest round-trip form. parse_config(emit_config(c)) == c.
inline std::string emit_config(const ExperimentConfig& c) {
  nlohmann::json j;
  auto pairs = [](const std::vector<TypePair>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p.x1, p.x2});
    return a;
  };
  j["kind"] = kind_name(c.kind);
  j["kernel"] = c.kernel;
  j["sites"] = c.sites;
  j["p_right"] = c.p_right;
  j["x0"] = pairs(c.x0);
  j["y"] = pairs(c.y);
  j["epsilon"] = c.epsilon;
  j["T"] = c.T;
  j["t"] = c.t;
  j["ode_dt"] = c.ode_dt;
  j["seed_mass_inv"] = c.seed_mass_inv;
  j["gamma"] = c.gamma;
  j["dt"] = c.dt;
  j["gammas"] = c.gammas;
  j["grid_step"] = c.grid_step;
  j["dt_scale"] = c.dt_scale;
  j["infinite_reps"] = c.infinite_reps;
  j["snapshots"] = c.snapshots;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j.dump(2) + "\n";
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MigrationMatrix build_kernel(const ExperimentConfig& c) {
  if (c.kernel == "cycle") return cycle_kernel(c.sites, c.p_right);
  const std::filesystem::path path = c.kernel.substr(7);
  const std::string text = read_file(path);
  MigrationMatrix A = path.extension() == ".json" ? matrix_from_json(text, c.sites) : matrix_from_csv(text);
  validate_matrix(A);
  return A;
}

// --- CSV emission ---------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& config_hash, const std::string& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << "# manifest=manifest.json config_hash=" << config_hash << "\n" << header << "\n";
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << "\n";
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I v) {
    return std::to_string(v);
  }

  std::ofstream out_;
};

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string error;
};

namespace detail {

inline void run_oracle(const ExperimentConfig&, const std::filesystem::path& dir, const std::string& hash,
                       RunResult& res) {
  CsvWriter w(dir / "oracle.csv", hash, "quantity,delta,closed_form,quadrature,abs_diff");
  res.files.push_back("oracle.csv");
  auto emit = [&](const char* q, double d, double closed, double quad) {
    w.row(q, d, closed, quad, std::abs(closed - quad));
  };
  for (double d : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    emit("u_tail_mass", d, nu_u_tail_mass(d), nu_quadrature::u_tail_mass(d).value);
    emit("v_tail_mass", d, nu_v_tail_mass(d), nu_quadrature::v_tail_mass(d).value);
    emit("v_tail_mass_printed", d, nu_v_tail_mass_printed(d), nu_quadrature::v_tail_mass(d).value);
    emit("first_moment_symmetric", d, nu_signed_first_moment(MomentKind::Symmetric, d),
         nu_quadrature::first_moment(MomentKind::Symmetric, d).value);
    emit("first_moment_upper", d, nu_signed_first_moment(MomentKind::Upper, d),
         nu_quadrature::first_moment(MomentKind::Upper, d).value);
    emit("compensator", d, compensator_coefficient(d), nu_quadrature::compensator(d).value);
  }
  emit("mean_y2", 0.0, nu_mean_y2(), nu_quadrature::mean_y2().value);
  // For m_p the delta column carries p and closed_form the upper bound.
  for (double p : {1.2, 1.5, 1.8}) emit("mp_bound", p, mp_bound(p), nu_quadrature::mp(p).value);
}

inline void run_finite(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                       RunResult& res) {
  const MigrationMatrix A = build_kernel(c);
  const Config x0 = config_from_pairs(c.initial(), false);
  if (x0.size() != A.size()) throw ConfigError("x0: window differs from the kernel size");
  FiniteRateParams fp;
  fp.gamma = c.gamma;
  fp.dt = c.dt;
  fp.T = c.T;
  const bool observe = !c.y.empty();
  const DualConfig y(c.dual_initial());
  auto paths = parallel_replicates(c.reps, [&](std::size_t rep) {
    RandomStream rng(c.seed, "finite-rate", rep);
    FiniteRateOptions opt;
    opt.snapshot_times = c.snapshot_times();
    return simulate_finite_rate(x0, A, fp, opt, rng);
  });
  CsvWriter w(dir / "finite-rate.csv", hash, "rep,t,site,x1,x2,degeneracy_integral");
  res.files.push_back("finite-rate.csv");
  for (std::size_t r = 0; r < paths.size(); ++r)
    for (const auto& s : paths[r].snapshots)
      for (Site k = 0; k < s.state.size(); ++k) w.row(r, s.time, k, s.state[k].x1, s.state[k].x2, s.degeneracy[k]);
  if (observe) {
    CsvWriter o(dir / "finite-rate-observables.csv", hash, "rep,t,H_re,H_im");
    res.files.push_back("finite-rate-observables.csv");
    for (std::size_t r = 0; r < paths.size(); ++r)
      for (const auto& s : paths[r].snapshots) {
        const Complex h = duality_H(s.state, y);
        o.row(r, s.time, h.real(), h.imag());
      }
  }
}

inline void run_infinite(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                         RunResult& res) {
  const MigrationMatrix A = build_kernel(c);
  const Config x0 = config_from_pairs(c.initial(), true);
  if (x0.size() != A.size()) throw ConfigError("x0: window differs from the kernel size");
  const InfRateParams p = c.inf_params();
  auto logs = parallel_replicates(c.reps, [&](std::size_t rep) {
    RandomStream rng(c.seed, "infinite-rate", rep);
    return simulate_infinite_rate(x0, A, p, c.snapshot_times(), rng);
  });
  CsvWriter w(dir / "infinite-rate.csv", hash, "rep,t,site,present_type,mass");
  CsvWriter e(dir / "infinite-rate-events.csv", hash, "rep,time,site,branch,value");
  res.files.push_back("infinite-rate.csv");
  res.files.push_back("infinite-rate-events.csv");
  for (std::size_t r = 0; r < logs.size(); ++r) {
    for (const auto& s : logs[r].snapshots)
      for (Site k = 0; k < s.state.size(); ++k) {
        const SiteState st = site_state(s.state[k]);
        w.row(r, s.time, k, static_cast<int>(st.type), st.mass);
      }
    for (const auto& ev : logs[r].events) e.row(r, ev.time, ev.site, branch_name(ev.branch), ev.value);
  }
}

inline const char* results_header() { return "experiment,parameter,value,se,bound,pass"; }

inline void run_duality(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                        RunResult& res) {
  const MigrationMatrix A = build_kernel(c);
  const Config x0 = config_from_pairs(c.initial(), true);
  const DualConfig y(config_from_pairs(c.dual_initial(), true).values);
  if (x0.size() != A.size() || y.size() != A.size()) throw ConfigError("x0/y: window differs from the kernel size");
  McSettings mc{c.reps, c.seed, "duality", 0};
  const DualityGap g = duality_gap(x0, y, A, c.inf_params(), c.t, mc);
  CsvWriter w(dir / "duality.csv", hash, results_header());
  res.files.push_back("duality.csv");
  const std::string t = "t=" + format_double(c.t);
  w.row("forward_re", t, g.forward.mean.real(), g.forward.se_re, "", "");
  w.row("forward_im", t, g.forward.mean.imag(), g.forward.se_im, "", "");
  w.row("dual_re", t, g.dual.mean.real(), g.dual.se_re, "", "");
  w.row("dual_im", t, g.dual.mean.imag(), g.dual.se_im, "", "");
  w.row("z_re", t, g.z_re, "", "", "");
  w.row("z_im", t, g.z_im, "", "", "");
  w.row("gap", t, g.gap, g.combined_se, g.threshold, g.pass);
}

inline void run_sweep(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                      RunResult& res) {
  const MigrationMatrix A = build_kernel(c);
  const Config x0 = config_from_pairs(c.initial(), true);
  const DualConfig y(config_from_pairs(c.dual_initial(), true).values);
  GammaSweepSettings st;
  st.gammas = c.gammas;
  st.T = c.T;
  st.grid_step = c.grid_step;
  st.dt_scale = c.dt_scale;
  st.finite_reps = c.reps;
  st.infinite_reps = c.infinite_reps;
  McSettings mc{c.reps, c.seed, "gamma-sweep", 0};
  const GammaSweep s = gamma_sweep(x0, y, A, c.inf_params(), st, mc);
  CsvWriter w(dir / "gamma-sweep.csv", hash, results_header());
  res.files.push_back("gamma-sweep.csv");
  w.row("infinite_functional_re", "gamma=inf", s.infinite_functional.mean.real(), s.infinite_functional.se_re, "",
        "");
  w.row("infinite_functional_im", "gamma=inf", s.infinite_functional.mean.imag(), s.infinite_functional.se_im, "",
        "");
  for (const auto& r : s.rows) {
    const std::string g = "gamma=" + format_double(r.gamma);
    w.row("functional_re", g, r.functional.mean.real(), r.functional.se_re, "", "");
    w.row("functional_im", g, r.functional.mean.imag(), r.functional.se_im, "", "");
    w.row("gap", g, r.gap, r.gap_se, "", "");
    w.row("fixed_t_gap", g, std::abs(r.fixed_t.mean - s.infinite_fixed_t.mean),
          std::hypot(r.fixed_t.std_error, s.infinite_fixed_t.std_error), "", "");
    w.row("degeneracy", g, r.degeneracy.mean.real(), r.degeneracy.se_re, "", "");
  }
  w.row("gap_shrinks", "", "", "", "", s.gap_shrinks);
  w.row("degeneracy_decreases", "", "", "", "", s.degeneracy_decreases);
}

inline void run_moments(const ExperimentConfig& c, const std::filesystem::path& dir, const std::string& hash,
                        RunResult& res) {
  const MigrationMatrix A = build_kernel(c);
  const Config x0 = config_from_pairs(c.initial(), true);
  if (x0.size() != A.size()) throw ConfigError("x0: window differs from the kernel size");
  const InfRateParams p = c.inf_params();
  const MomentReport rep = moment_check(x0, A, c.t, c.reps, [&](std::size_t r) {
    RandomStream rng(c.seed, "moments", r);
    return forward_state(x0, A, p, c.t, rng);
  });
  CsvWriter w(dir / "moments.csv", hash, results_header());
  res.files.push_back("moments.csv");
  for (const auto& r : rep.rows) {
    const std::string name = r.kind == "single"
                                 ? "single_X" + std::to_string(r.type) + "(" + std::to_string(r.k1) + ")"
                                 : "cross_X1(" + std::to_string(r.k1) + ")X2(" + std::to_string(r.k2) + ")";
    w.row(name, "t=" + format_double(rep.t), r.mean, r.se, r.bound, r.pass);
  }
}

}  // namespace detail

/// Runs one experiment into `c.output` (or `output_override` when set).
/// Writes the result CSVs and manifest.json; on failure the manifest is
/// still written with status "partial" and the error message.
inline RunResult run_experiment(const ExperimentConfig& c, const std::optional<std::string>& output_override = {}) {
  validate_config(c);
  const std::filesystem::path dir = output_override.value_or(c.output);
  std::filesystem::create_directories(dir);
  const std::string canonical = emit_config(c);
  const std::string hash = hex64(fnv1a(canonical));
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (c.kind) {
      case ExperimentKind::Oracle: detail::run_oracle(c, dir, hash, res); break;
      case ExperimentKind::FiniteRate: detail::run_finite(c, dir, hash, res); break;
      case ExperimentKind::InfiniteRate: detail::run_infinite(c, dir, hash, res); break;
      case ExperimentKind::Duality: detail::run_duality(c, dir, hash, res); break;
      case ExperimentKind::GammaSweep: detail::run_sweep(c, dir, hash, res); break;
      case ExperimentKind::Moments: detail::run_moments(c, dir, hash, res); break;
    }
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json m;
  m["config_hash"] = hash;
  m["config"] = nlohmann::json::parse(canonical);
  m["seed"] = c.seed;
  m["version"] = kVersion;
  m["compiler"] = __VERSION__;
  m["wall_time_s"] = wall;
  m["files"] = res.files;
  m["status"] = res.exit_code == 0 ? "complete" : "partial";
  if (res.exit_code != 0) m["error"] = res.error;
  std::ofstream(dir / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
  return res;
}

}  // namespace catalytic
