// Command-line front end: one subcommand per experiment kind plus `run`.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "catalytic/experiment.hpp"

using namespace catalytic;

namespace {

struct Flags {
  std::string kernel = "cycle";
  std::size_t sites = 2;
  double p_right = 0.5;
  std::string x0, y, gammas, snapshots;
  double epsilon = 0.1, T = 1.0, t = 1.0, ode_dt = 1e-3, seed_mass_inv = 1e3;
  double gamma = 1.0, dt = 0.0, grid_step = 0.05, dt_scale = 0.0;
  std::size_t reps = 100, infinite_reps = 10000;
  std::uint64_t seed = 1;
  std::string output = "out";
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--kernel", f.kernel, "Migration kernel: cycle or custom:<path> (.csv dense rows, .json triples)")
      ->capture_default_str();
  app->add_option("--sites", f.sites, "Window size for the cycle kernel")->capture_default_str();
  app->add_option("--p-right", f.p_right, "Cycle kernel: probability of stepping to k+1")->capture_default_str();
  app->add_option("--x0", f.x0, "Initial state 'x1,x2;x1,x2;...' (default (1,0),(0,1),0,...)");
  app->add_option("--reps", f.reps, "Replicates")->capture_default_str();
  app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app->add_option("--output", f.output, "Output directory (CATALYTIC_OUTPUT_DIR overrides)")->capture_default_str();
}

void add_infinite(CLI::App* app, Flags& f) {
  app->add_option("--epsilon", f.epsilon, "Small-jump cutoff")->capture_default_str();
  app->add_option("--ode-dt", f.ode_dt, "Between-jump sub-step")->capture_default_str();
  app->add_option("--seed-mass-inv", f.seed_mass_inv, "l: empty sites with two-sided inflow get type 2 at 1/l")
      ->capture_default_str();
}

ExperimentConfig to_config(ExperimentKind kind, const Flags& f) {
  std::string text = "kind=" + std::string(kind_name(kind)) + "\n";
  auto kv = [&](const std::string& k, const std::string& v) { text += k + "=" + v + "\n"; };
  kv("kernel", f.kernel);
  kv("sites", std::to_string(f.sites));
  kv("p_right", format_double(f.p_right));
  if (!f.x0.empty()) kv("x0", f.x0);
  if (!f.y.empty()) kv("y", f.y);
  if (!f.gammas.empty()) kv("gammas", f.gammas);
  if (!f.snapshots.empty()) kv("snapshots", f.snapshots);
  kv("epsilon", format_double(f.epsilon));
  kv("T", format_double(f.T));
  kv("t", format_double(f.t));
  kv("ode_dt", format_double(f.ode_dt));
  kv("seed_mass_inv", format_double(f.seed_mass_inv));
  kv("gamma", format_double(f.gamma));
  kv("dt", format_double(f.dt));
  kv("grid_step", format_double(f.grid_step));
  kv("dt_scale", format_double(f.dt_scale));
  kv("reps", std::to_string(f.reps));
  kv("infinite_reps", std::to_string(f.infinite_reps));
  kv("seed", std::to_string(f.seed));
  kv("output", f.output);
  return parse_config(text);
}

int execute(const ExperimentConfig& cfg) {
  std::optional<std::string> dir;
  if (const char* env = std::getenv("CATALYTIC_OUTPUT_DIR"); env && *env) dir = env;
  const RunResult r = run_experiment(cfg, dir);
  const std::string where = dir.value_or(cfg.output);
  for (const auto& f : r.files) std::cout << where << "/" << f << "\n";
  if (r.exit_code != 0) std::cerr << "error: " << r.error << " (partial results in " << where << ")\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutually catalytic branching: finite-rate and infinite-rate simulation, duality checks"};
  app.require_subcommand(1);
  Flags f;
  std::optional<ExperimentKind> chosen;
  std::string config_path;

  auto* oracle = app.add_subcommand("oracle", "Closed-form jump-measure masses and moments vs quadrature");
  oracle->add_option("--output", f.output, "Output directory")->capture_default_str();

  auto* finite = app.add_subcommand("finite-rate", "Euler-Maruyama paths of the finite-rate system");
  add_common(finite, f);
  finite->add_option("--gamma", f.gamma, "Branching rate")->capture_default_str();
  finite->add_option("--dt", f.dt, "Step (0: 1e-4 min(1, 1/gamma))")->capture_default_str();
  finite->add_option("--T", f.T, "Horizon")->capture_default_str();
  finite->add_option("--snapshots", f.snapshots, "Comma-separated snapshot times (default T)");
  finite->add_option("--observable", f.y, "Dual state 'y1,y2;...': also emit H(Y_t, y) per snapshot");

  auto* infinite = app.add_subcommand("infinite-rate", "Event-driven paths at a fixed small-jump cutoff");
  add_common(infinite, f);
  add_infinite(infinite, f);
  infinite->add_option("--T", f.T, "Horizon")->capture_default_str();
  infinite->add_option("--snapshots", f.snapshots, "Comma-separated snapshot times (default T)");

  auto* duality = app.add_subcommand("duality", "Forward vs dual estimate of E[H]");
  add_common(duality, f);
  add_infinite(duality, f);
  duality->add_option("--t", f.t, "Evaluation time")->capture_default_str();
  duality->add_option("--y", f.y, "Dual initial state 'y1,y2;...' (default (0,1) at site 0)");

  auto* sweep = app.add_subcommand("gamma-sweep", "Finite-rate time-averaged H functional vs the infinite-rate one");
  add_common(sweep, f);
  add_infinite(sweep, f);
  sweep->add_option("--T", f.T, "Horizon")->capture_default_str();
  sweep->add_option("--y", f.y, "Dual state 'y1,y2;...'");
  sweep->add_option("--gammas", f.gammas, "Comma-separated gamma grid (default 1,10,100,1000)");
  sweep->add_option("--grid-step", f.grid_step, "Snapshot grid step")->capture_default_str();
  sweep->add_option("--dt-scale", f.dt_scale, "Finite-rate step dt_scale / max(1, gamma); 0 keeps the default")
      ->capture_default_str();
  sweep->add_option("--infinite-reps", f.infinite_reps, "Infinite-rate replicates")->capture_default_str();

  auto* moments = app.add_subcommand("moments", "First and cross moments vs the e^{t|A|} bounds");
  add_common(moments, f);
  add_infinite(moments, f);
  moments->add_option("--t", f.t, "Evaluation time")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON or key=value config file");
  run->add_option("--config", config_path, "Config file")->required();
  std::string run_output;
  run->add_option("--output", run_output, "Output directory (overrides the config's output key)");

  oracle->callback([&] { chosen = ExperimentKind::Oracle; });
  finite->callback([&] { chosen = ExperimentKind::FiniteRate; });
  infinite->callback([&] { chosen = ExperimentKind::InfiniteRate; });
  duality->callback([&] { chosen = ExperimentKind::Duality; });
  sweep->callback([&] { chosen = ExperimentKind::GammaSweep; });
  moments->callback([&] { chosen = ExperimentKind::Moments; });

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) {
      ExperimentConfig cfg = parse_config(read_file(config_path));
      if (!run_output.empty()) cfg.output = run_output;
      return execute(cfg);
    }
    // Duality and moments evaluate at t; keep the horizon consistent with it.
    if (*chosen == ExperimentKind::Duality || *chosen == ExperimentKind::Moments) f.T = std::max(f.T, f.t);
    return execute(to_config(*chosen, f));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
