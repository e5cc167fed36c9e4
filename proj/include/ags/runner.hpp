#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "ags/instances.hpp"
#include "ags/multistage.hpp"

namespace ags {

// Synthetic per-call prices.  Reported cost of a run is
//   grad_f * n_grad_f + grad_h * n_grad_h + apply_K * (n_apply_K + n_apply_Kt).
// Negative entries mean "use the instance default":
//   portfolio: grad_f = n, grad_h = m, apply_K = 0
//   tv:        grad_f = n, grad_h = 0, apply_K = 1
struct CostModel {
  double grad_f = -1.0;
  double grad_h = -1.0;
  double apply_K = -1.0;
};

// One experiment.  Mirrors the CLI flags; can be loaded from a JSON file
// with matching keys and "schema_version": 1.
struct RunConfig {
  std::string command;  // gen-portfolio | gen-tv | solve-smooth | solve-spp
                        // | solve-mags | solve-dyn | race
  std::string out_dir = ".";
  std::string instance_path;
  std::uint64_t seed = 1;
  bool trace_objective = false;
  bool emit_wall_time = false;  // off by default so reruns are byte-identical

  // generators
  int n = 200, m = 16;
  double target_ratio = 1024.0;
  int rows = 8, cols = 8;
  double eta_tv = 1.0;
  double noise_var = 0.001;

  // solvers
  std::string solver = "ags-cor2";  // ags-cor1 | ags-cor2 | nest
  int iters = 100;
  double epsilon = 1e-2;
  double radius_sq = -1.0;  // primal V(x0,x*) bound; -1 = derive from set
  double ridge = 0.0;       // strong-convexity term added to the TV fit
  double rho = 0.0;         // fixed smoothing weight for solve-mags
  double delta0 = 0.0;      // initial-gap bound for multi-stage runs

  // race
  double budget = -1.0;  // -1 = 300 * (grad_f + grad_h) iteration prices
  std::vector<std::string> race_solvers = {"ags-cor2", "nest"};
  CostModel cost;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Budgeted comparison on one smooth composite instance.  Every contestant
// starts from the same point and runs until its NEXT outer iteration would
// push the accumulated synthetic cost past the shared budget, so consumed
// cost lands within one iteration of the budget (within 1% whenever the
// budget covers ~100 iterations).  Throws BudgetTooSmall if some contestant
// cannot afford its first iteration.
struct RaceEntry {
  std::string solver;
  double objective = 0.0;
  double cost = 0.0;
  int iterations = 0;
  OracleCounters counters;
};

struct RaceResult {
  std::vector<RaceEntry> entries;  // input order; slot 0 is the denominator
  double ratio = 0.0;  // objective(last) / objective(first)
  double budget = 0.0;
};

RaceResult race(const PortfolioInstance& inst,
                const std::vector<std::string>& solvers, double budget,
                const CostModel& cost, bool trace_objective = false,
                RunTrace* traces = nullptr);

// Executes one config: runs the command and writes its artifacts under
// out_dir (instance.json / trace.csv / summary.json / race.json).  Files are
// written to a temp name and renamed, so readers never observe partial
// output.  Throws ConfigError / SolverError-family / IoError; the CLI maps
// those to exit codes 2 / 3 / 4.
void run(const RunConfig& cfg);

// Trace serialization used by run(): columns
//   k,n_grad_f,n_grad_h,n_apply_K,n_apply_Kt,cost[,objective]
// floats with 17 significant digits, \n line endings.
std::string trace_to_csv(const RunTrace& trace, const CostModel& cost);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace ags
