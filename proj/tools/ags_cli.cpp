// Command-line harness around the sliding solvers: instance generators,
// single-solver runs that emit trace.csv/summary.json, and budgeted races.
// Exit codes: 0 ok, 2 bad usage/config, 3 solver failure, 4 I/O failure.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "ags/errors.hpp"
#include "ags/runner.hpp"

namespace {

void add_common(CLI::App* cmd, ags::RunConfig& cfg) {
  cmd->add_option("--out", cfg.out_dir, "Output directory")
      ->capture_default_str();
  cmd->add_flag("--trace-objective", cfg.trace_objective,
                "Log the objective each outer iteration (extra value calls, "
                "booked on the diagnostic counters)");
  cmd->add_flag("--wall-time", cfg.emit_wall_time,
                "Include wall_time_ms in the summary (off by default so "
                "reruns are byte-identical)");
}

void add_instance(CLI::App* cmd, ags::RunConfig& cfg) {
  cmd->add_option("--instance", cfg.instance_path, "Path to instance.json")
      ->required();
}

void add_cost(CLI::App* cmd, ags::RunConfig& cfg) {
  cmd->add_option("--cost-grad-f", cfg.cost.grad_f,
                  "Price of one f-gradient (negative = instance default)");
  cmd->add_option("--cost-grad-h", cfg.cost.grad_h,
                  "Price of one h-gradient (negative = instance default)");
  cmd->add_option("--cost-apply-k", cfg.cost.apply_K,
                  "Price of one K or K' apply (negative = instance default)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gradient sliding solvers: two-loop composite minimization, "
      "multi-stage restarts, and smoothed saddle-point runs with "
      "per-oracle-call accounting"};
  app.require_subcommand(0, 1);

  ags::RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path,
                 "Run one JSON config instead of a subcommand");

  auto* gen_p = app.add_subcommand(
      "gen-portfolio", "Generate a simplex-with-return-floor QP instance");
  gen_p->add_option("--n", cfg.n, "Assets")->capture_default_str();
  gen_p->add_option("--m", cfg.m, "Factors")->capture_default_str();
  gen_p->add_option("--target-ratio", cfg.target_ratio,
                    "Smoothness ratio M/L")
      ->capture_default_str();
  gen_p->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  add_common(gen_p, cfg);

  auto* gen_t = app.add_subcommand(
      "gen-tv", "Generate a total-variation image recovery instance");
  gen_t->add_option("--rows", cfg.rows, "Image rows")->capture_default_str();
  gen_t->add_option("--cols", cfg.cols, "Image cols")->capture_default_str();
  gen_t->add_option("--eta-tv", cfg.eta_tv, "TV weight")
      ->capture_default_str();
  gen_t->add_option("--noise-var", cfg.noise_var, "Measurement noise variance")
      ->capture_default_str();
  gen_t->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  add_common(gen_t, cfg);

  auto* smooth = app.add_subcommand(
      "solve-smooth",
      "Run one solver on a portfolio instance (entropy geometry)");
  add_instance(smooth, cfg);
  smooth->add_option("--solver", cfg.solver, "ags-cor1 | ags-cor2 | nest")
      ->capture_default_str();
  smooth->add_option("--iters", cfg.iters, "Outer iterations")
      ->capture_default_str();
  add_cost(smooth, cfg);
  add_common(smooth, cfg);

  auto* spp = app.add_subcommand(
      "solve-spp",
      "One-shot smoothing run on a TV instance targeting accuracy epsilon");
  add_instance(spp, cfg);
  spp->add_option("--epsilon", cfg.epsilon, "Target accuracy")
      ->capture_default_str();
  spp->add_option("--radius-sq", cfg.radius_sq,
                  "Primal radius bound V(x0,x*); negative = derive from set")
      ->capture_default_str();
  spp->add_option("--ridge", cfg.ridge, "Strong-convexity term on the fit")
      ->capture_default_str();
  add_cost(spp, cfg);
  add_common(spp, cfg);

  auto* mags = app.add_subcommand(
      "solve-mags",
      "Multi-stage restarted run on a ridge-augmented smoothed TV objective");
  add_instance(mags, cfg);
  mags->add_option("--ridge", cfg.ridge, "Strong-convexity term (> 0)")
      ->capture_default_str();
  mags->add_option("--rho", cfg.rho, "Fixed smoothing weight (> 0)")
      ->capture_default_str();
  mags->add_option("--delta0", cfg.delta0, "Initial gap bound (> 0)")
      ->capture_default_str();
  mags->add_option("--epsilon", cfg.epsilon, "Target accuracy")
      ->capture_default_str();
  add_cost(mags, cfg);
  add_common(mags, cfg);

  auto* dyn = app.add_subcommand(
      "solve-dyn",
      "Multi-stage run with geometrically decaying smoothing weight");
  add_instance(dyn, cfg);
  dyn->add_option("--ridge", cfg.ridge, "Strong-convexity term (> 0)")
      ->capture_default_str();
  dyn->add_option("--delta0", cfg.delta0, "Initial gap bound (> 0)")
      ->capture_default_str();
  dyn->add_option("--epsilon", cfg.epsilon, "Target accuracy")
      ->capture_default_str();
  add_cost(dyn, cfg);
  add_common(dyn, cfg);

  auto* race = app.add_subcommand(
      "race", "Run several solvers under one synthetic cost budget");
  add_instance(race, cfg);
  race->add_option("--solvers", cfg.race_solvers,
                   "Comma-separated contestants in order; slot 0 is the "
                   "ratio denominator")
      ->delimiter(',')
      ->capture_default_str();
  race->add_option("--budget", cfg.budget,
                   "Total cost budget (negative = 300 iteration prices)")
      ->capture_default_str();
  add_cost(race, cfg);
  add_common(race, cfg);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      if (app.get_subcommands().size() != 0) {
        throw ags::ConfigError("--config excludes subcommands");
      }
      ags::run(ags::load_config(config_path));
      return 0;
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
      std::fputs(app.help().c_str(), stderr);
      return 2;
    }
    cfg.command = subs.front()->get_name();
    ags::run(cfg);
    return 0;
  } catch (const ags::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ags::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const ags::Error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
