#include "ags/runner.hpp"

#include <chrono>
#include <cinttypes>
#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "ags/errors.hpp"

namespace ags {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double row_cost(const OracleCounters& c, const CostModel& cost) {
  return cost.grad_f * static_cast<double>(c.n_grad_f) +
         cost.grad_h * static_cast<double>(c.n_grad_h) +
         cost.apply_K * static_cast<double>(c.n_apply_K + c.n_apply_Kt);
}

CostModel resolve_cost(const CostModel& cost, const PortfolioInstance& inst) {
  CostModel r = cost;
  if (r.grad_f < 0.0) r.grad_f = inst.n;
  if (r.grad_h < 0.0) r.grad_h = inst.m;
  if (r.apply_K < 0.0) r.apply_K = 0.0;
  return r;
}

CostModel resolve_cost(const CostModel& cost, const TvInstance& inst) {
  CostModel r = cost;
  if (r.grad_f < 0.0) r.grad_f = inst.n;
  if (r.grad_h < 0.0) r.grad_h = 0.0;
  if (r.apply_K < 0.0) r.apply_K = 1.0;
  return r;
}

json counters_to_json(const OracleCounters& c) {
  return json{{"n_grad_f", c.n_grad_f},
              {"n_grad_h", c.n_grad_h},
              {"n_apply_K", c.n_apply_K},
              {"n_apply_Kt", c.n_apply_Kt}};
}

json cost_to_json(const CostModel& c) {
  return json{{"grad_f", c.grad_f},
              {"grad_h", c.grad_h},
              {"apply_K", c.apply_K}};
}

// The constants a schedule is built from, echoed into every summary.
json schedule_to_json(const AgsSchedule& s) {
  json j;
  j["name"] = s.name;
  j["L"] = s.L;
  j["M"] = s.M;
  j["nu"] = s.nu;
  j["gamma1"] = s.gamma(1);
  j["beta1"] = s.beta(1);
  j["lambda1"] = s.lambda(1);
  j["T1"] = s.inner_steps(1);
  j["Tk"] = s.inner_steps(2);
  j["lambda2"] = s.lambda(2);
  j["beta2"] = s.beta(2);
  j["alpha"] = s.alpha(2, 1);
  j["p"] = s.p(2, 1);
  j["q21"] = s.q(2, 1);
  return j;
}

struct SolveArtifacts {
  RunTrace trace;
  json summary;
};

void write_artifacts(const RunConfig& cfg, const SolveArtifacts& art,
                     const CostModel& cost) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + cfg.out_dir);
  write_text_atomic(cfg.out_dir + "/trace.csv",
                    trace_to_csv(art.trace, cost));
  write_text_atomic(cfg.out_dir + "/summary.json", art.summary.dump(2) + "\n");
}

PortfolioInstance expect_portfolio(const RunConfig& cfg) {
  if (cfg.instance_path.empty()) {
    throw ConfigError(cfg.command + ": --instance required");
  }
  AnyInstance any = load_instance(cfg.instance_path);
  if (!std::holds_alternative<PortfolioInstance>(any)) {
    throw ConfigError(cfg.command + ": needs a portfolio instance");
  }
  return std::get<PortfolioInstance>(std::move(any));
}

TvInstance expect_tv(const RunConfig& cfg) {
  if (cfg.instance_path.empty()) {
    throw ConfigError(cfg.command + ": --instance required");
  }
  AnyInstance any = load_instance(cfg.instance_path);
  if (!std::holds_alternative<TvInstance>(any)) {
    throw ConfigError(cfg.command + ": needs a tv instance");
  }
  return std::get<TvInstance>(std::move(any));
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string trace_to_csv(const RunTrace& trace, const CostModel& cost) {
  const bool has_objective =
      !trace.rows.empty() && trace.rows.front().objective.has_value();
  std::string out = "k,n_grad_f,n_grad_h,n_apply_K,n_apply_Kt,cost";
  if (has_objective) out += ",objective";
  out += "\n";
  char buf[160];
  for (const auto& row : trace.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64, row.k,
                  row.counters.n_grad_f, row.counters.n_grad_h,
                  row.counters.n_apply_K, row.counters.n_apply_Kt);
    out += buf;
    out += ',';
    out += fmt17(row_cost(row.counters, cost));
    if (has_objective) {
      out += ',';
      out += fmt17(row.objective.value_or(
          std::numeric_limits<double>::quiet_NaN()));
    }
    out += "\n";
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failure on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("rename to " + path + " failed");
  }
}

RunConfig config_from_json(const json& j) {
  if (j.value("schema_version", 0) != 1) {
    throw ConfigError("config: schema_version must be 1");
  }
  RunConfig cfg;
  cfg.command = j.value("command", "");
  cfg.out_dir = j.value("out", cfg.out_dir);
  cfg.instance_path = j.value("instance", cfg.instance_path);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.trace_objective = j.value("trace_objective", cfg.trace_objective);
  cfg.emit_wall_time = j.value("wall_time", cfg.emit_wall_time);
  cfg.n = j.value("n", cfg.n);
  cfg.m = j.value("m", cfg.m);
  cfg.target_ratio = j.value("target_ratio", cfg.target_ratio);
  cfg.rows = j.value("rows", cfg.rows);
  cfg.cols = j.value("cols", cfg.cols);
  cfg.eta_tv = j.value("eta_tv", cfg.eta_tv);
  cfg.noise_var = j.value("noise_var", cfg.noise_var);
  cfg.solver = j.value("solver", cfg.solver);
  cfg.iters = j.value("iters", cfg.iters);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.radius_sq = j.value("radius_sq", cfg.radius_sq);
  cfg.ridge = j.value("ridge", cfg.ridge);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.delta0 = j.value("delta0", cfg.delta0);
  cfg.budget = j.value("budget", cfg.budget);
  if (j.contains("race_solvers")) {
    cfg.race_solvers = j.at("race_solvers").get<std::vector<std::string>>();
  }
  if (j.contains("cost")) {
    const auto& c = j.at("cost");
    cfg.cost.grad_f = c.value("grad_f", cfg.cost.grad_f);
    cfg.cost.grad_h = c.value("grad_h", cfg.cost.grad_h);
    cfg.cost.apply_K = c.value("apply_K", cfg.cost.apply_K);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  return config_from_json(j);
}

RaceResult race(const PortfolioInstance& inst,
                const std::vector<std::string>& solvers, double budget,
                const CostModel& cost_in, bool trace_objective,
                RunTrace* traces) {
  if (solvers.size() < 2) throw ConfigError("race: need at least two solvers");
  const CostModel cost = resolve_cost(cost_in, inst);
  if (!(budget > 0.0)) {
    budget = 300.0 * (cost.grad_f + cost.grad_h);
  }
  const SmoothOracle f = portfolio_f(inst);
  const SmoothOracle h = portfolio_h(inst);
  const FeasibleSet set = portfolio_set(inst);
  const BregmanGeometry geom = BregmanGeometry::Entropy();
  const VectorXd x0 = portfolio_start(inst);

  RaceResult result;
  result.budget = budget;
  for (std::size_t s = 0; s < solvers.size(); ++s) {
    const std::string& name = solvers[s];
    const bool is_nest = name == "nest";
    AgsSchedule sched;
    if (name == "ags-cor1") {
      sched = schedule_cor1(inst.L, inst.M, geom.modulus);
    } else if (name == "ags-cor2") {
      sched = schedule_cor2(inst.L, inst.M, geom.modulus);
    } else if (!is_nest) {
      throw ConfigError("race: unknown solver '" + name + "'");
    }
    // Price of outer iteration k, known before running it.
    auto iter_price = [&](int k) {
      return is_nest ? cost.grad_f + cost.grad_h
                     : cost.grad_f + cost.grad_h * sched.inner_steps(k);
    };
    if (iter_price(1) > budget) {
      throw BudgetTooSmall("race: budget below the first iteration of " +
                           name);
    }
    AgsOptions opts;
    opts.trace_objective = trace_objective;
    opts.keep_going = [&](int k, const OracleCounters& c) {
      return row_cost(c, cost) + iter_price(k) <= budget + 1e-9;
    };
    AgsResult run = is_nest
                        ? nest_run(f, h, geom, set, x0, INT_MAX / 2, opts)
                        : ags_run(f, h, geom, set, x0, INT_MAX / 2, sched,
                                  opts);
    RaceEntry entry;
    entry.solver = name;
    entry.objective = f.value(run.x_bar) + h.value(run.x_bar);
    entry.cost = row_cost(*run.counters, cost);
    entry.iterations = run.iterations;
    entry.counters = *run.counters;
    result.entries.push_back(std::move(entry));
    if (traces) traces[s] = std::move(run.trace);
  }
  result.ratio =
      result.entries.back().objective / result.entries.front().objective;
  return result;
}

namespace {

void run_gen_portfolio(const RunConfig& cfg) {
  const PortfolioInstance inst =
      gen_portfolio(cfg.n, cfg.m, cfg.target_ratio, cfg.seed);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + cfg.out_dir);
  write_text_atomic(cfg.out_dir + "/instance.json",
                    to_json(inst).dump(2) + "\n");
  json summary{{"schema_version", 1},   {"command", "gen-portfolio"},
               {"seed", cfg.seed},      {"n", inst.n},
               {"m", inst.m},           {"L", inst.L},
               {"M", inst.M},           {"target_ratio", cfg.target_ratio}};
  write_text_atomic(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
}

void run_gen_tv(const RunConfig& cfg) {
  const TvInstance inst =
      gen_tv(cfg.rows, cfg.cols, cfg.eta_tv, cfg.noise_var, cfg.seed);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + cfg.out_dir);
  write_text_atomic(cfg.out_dir + "/instance.json",
                    to_json(inst).dump(2) + "\n");
  json summary{{"schema_version", 1}, {"command", "gen-tv"},
               {"seed", cfg.seed},    {"rows", inst.rows},
               {"cols", inst.cols},   {"m", inst.m},
               {"L", inst.L},         {"K_norm", inst.K_norm},
               {"eta_tv", inst.eta_tv}};
  write_text_atomic(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
}

void run_solve_smooth(const RunConfig& cfg) {
  const PortfolioInstance inst = expect_portfolio(cfg);
  const CostModel cost = resolve_cost(cfg.cost, inst);
  const SmoothOracle f = portfolio_f(inst);
  const SmoothOracle h = portfolio_h(inst);
  const FeasibleSet set = portfolio_set(inst);
  const BregmanGeometry geom = BregmanGeometry::Entropy();
  const VectorXd x0 = portfolio_start(inst);

  AgsOptions opts;
  opts.trace_objective = cfg.trace_objective;
  const long long t0 = now_ms();
  AgsResult res;
  json sched_json;
  if (cfg.solver == "nest") {
    res = nest_run(f, h, geom, set, x0, cfg.iters, opts);
    sched_json = {{"name", "nest"},
                  {"L_total", f.lipschitz + h.lipschitz},
                  {"gamma1", 1.0},
                  {"eta1", 2.0 * (f.lipschitz + h.lipschitz) / geom.modulus}};
  } else if (cfg.solver == "ags-cor1" || cfg.solver == "ags-cor2") {
    const AgsSchedule sched =
        cfg.solver == "ags-cor1" ? schedule_cor1(inst.L, inst.M, geom.modulus)
                                 : schedule_cor2(inst.L, inst.M, geom.modulus);
    res = ags_run(f, h, geom, set, x0, cfg.iters, sched, opts);
    sched_json = schedule_to_json(sched);
  } else {
    throw ConfigError("solve-smooth: unknown solver '" + cfg.solver + "'");
  }
  const long long t1 = now_ms();

  SolveArtifacts art;
  art.trace = std::move(res.trace);
  art.summary = json{{"schema_version", 1},
                     {"command", "solve-smooth"},
                     {"instance", cfg.instance_path},
                     {"solver", cfg.solver},
                     {"n_outer", res.iterations},
                     {"objective", f.value(res.x_bar) + h.value(res.x_bar)},
                     {"counters", counters_to_json(*res.counters)},
                     {"diagnostic_counters",
                      counters_to_json(*res.diagnostics)},
                     {"schedule", sched_json},
                     {"cost_model", cost_to_json(cost)},
                     {"cost", row_cost(*res.counters, cost)}};
  if (cfg.emit_wall_time) art.summary["wall_time_ms"] = t1 - t0;
  write_artifacts(cfg, art, cost);
}

void run_solve_spp(const RunConfig& cfg) {
  const TvInstance inst = expect_tv(cfg);
  const CostModel cost = resolve_cost(cfg.cost, inst);
  const SaddleInstance saddle = tv_saddle(inst, cfg.ridge);
  const BregmanGeometry geom = BregmanGeometry::Euclidean();
  const VectorXd x0 = VectorXd::Zero(inst.n);

  SppOptions opts;
  opts.radius_sq = cfg.radius_sq;
  opts.trace_objective = cfg.trace_objective;
  const long long t0 = now_ms();
  SppResult res = solve_spp(saddle, x0, cfg.epsilon, geom, opts);
  const long long t1 = now_ms();

  const AgsSchedule sched =
      res.roles_swapped
          ? schedule_cor2(res.M, saddle.f.lipschitz, geom.modulus)
          : schedule_cor2(saddle.f.lipschitz, res.M, geom.modulus);
  SolveArtifacts art;
  art.trace = std::move(res.trace);
  art.summary = json{{"schema_version", 1},
                     {"command", "solve-spp"},
                     {"instance", cfg.instance_path},
                     {"solver", "ags-cor2"},
                     {"epsilon", cfg.epsilon},
                     {"rho", res.rho},
                     {"M_smoothed", res.M},
                     {"Omega", saddle.Omega},
                     {"n_outer", res.N},
                     {"roles_swapped", res.roles_swapped},
                     {"objective_psi", psi_exact(saddle, res.x_bar)},
                     {"counters", counters_to_json(*res.counters)},
                     {"diagnostic_counters",
                      counters_to_json(*res.diagnostics)},
                     {"schedule", schedule_to_json(sched)},
                     {"cost_model", cost_to_json(cost)},
                     {"cost", row_cost(*res.counters, cost)}};
  if (cfg.emit_wall_time) art.summary["wall_time_ms"] = t1 - t0;
  write_artifacts(cfg, art, cost);
}

void run_solve_mags(const RunConfig& cfg) {
  const TvInstance inst = expect_tv(cfg);
  if (!(cfg.ridge > 0.0)) {
    throw ConfigError("solve-mags: --ridge > 0 required (strong convexity)");
  }
  if (!(cfg.rho > 0.0)) {
    throw ConfigError("solve-mags: --rho > 0 required (fixed smoothing)");
  }
  if (!(cfg.delta0 > 0.0)) {
    throw ConfigError("solve-mags: --delta0 > 0 required");
  }
  const CostModel cost = resolve_cost(cfg.cost, inst);
  const SaddleInstance saddle = tv_saddle(inst, cfg.ridge);
  const BregmanGeometry geom = BregmanGeometry::Euclidean();
  auto counters = std::make_shared<OracleCounters>();
  auto diag = std::make_shared<OracleCounters>();
  const SmoothedObjective sm =
      make_smoothed(saddle, cfg.rho, counters, diag);
  const SmoothOracle f = saddle.f;
  const StagePlan plan = plan_mags(f.lipschitz, f.strong_convexity,
                                   geom.modulus, cfg.delta0, cfg.epsilon);
  AgsOptions opts;
  opts.trace_objective = cfg.trace_objective;
  opts.counters = counters;
  opts.diagnostics = diag;
  const VectorXd v0 = VectorXd::Zero(inst.n);
  const long long t0 = now_ms();
  MagsResult res = mags_run(f, sm.h_rho, geom, saddle.X, v0, plan, opts);
  const long long t1 = now_ms();

  SolveArtifacts art;
  art.trace = std::move(res.trace);
  art.summary =
      json{{"schema_version", 1},
           {"command", "solve-mags"},
           {"instance", cfg.instance_path},
           {"ridge", cfg.ridge},
           {"rho", cfg.rho},
           {"delta0", plan.delta0},
           {"epsilon", plan.epsilon},
           {"stages", plan.stages},
           {"inner_budget", plan.inner_budget},
           {"objective_smoothed", f.value(res.v) + sm.h_rho.value(res.v)},
           {"counters", counters_to_json(*res.counters)},
           {"diagnostic_counters", counters_to_json(*res.diagnostics)},
           {"schedule",
            schedule_to_json(schedule_cor2(f.lipschitz, sm.h_rho.lipschitz,
                                           geom.modulus))},
           {"cost_model", cost_to_json(cost)},
           {"cost", row_cost(*res.counters, cost)}};
  if (cfg.emit_wall_time) art.summary["wall_time_ms"] = t1 - t0;
  write_artifacts(cfg, art, cost);
}

void run_solve_dyn(const RunConfig& cfg) {
  const TvInstance inst = expect_tv(cfg);
  if (!(cfg.ridge > 0.0)) {
    throw ConfigError("solve-dyn: --ridge > 0 required (strong convexity)");
  }
  if (!(cfg.delta0 > 0.0)) {
    throw ConfigError("solve-dyn: --delta0 > 0 required");
  }
  const CostModel cost = resolve_cost(cfg.cost, inst);
  const SaddleInstance saddle = tv_saddle(inst, cfg.ridge);
  const BregmanGeometry geom = BregmanGeometry::Euclidean();
  AgsOptions opts;
  opts.trace_objective = cfg.trace_objective;
  const VectorXd v0 = VectorXd::Zero(inst.n);
  const long long t0 = now_ms();
  MagsResult res = mags_dynamic_smoothing(saddle, v0, cfg.delta0, cfg.epsilon,
                                          geom, opts);
  const long long t1 = now_ms();

  SolveArtifacts art;
  art.trace = std::move(res.trace);
  json rho_json = json::array();
  for (double r : res.stage_rho) rho_json.push_back(r);
  art.summary = json{{"schema_version", 1},
                     {"command", "solve-dyn"},
                     {"instance", cfg.instance_path},
                     {"ridge", cfg.ridge},
                     {"delta0", res.plan.delta0},
                     {"epsilon", res.plan.epsilon},
                     {"stages", res.plan.stages},
                     {"inner_budget", res.plan.inner_budget},
                     {"rho0", res.plan.rho0},
                     {"stage_rho", rho_json},
                     {"objective_psi", psi_exact(saddle, res.v)},
                     {"counters", counters_to_json(*res.counters)},
                     {"diagnostic_counters",
                      counters_to_json(*res.diagnostics)},
                     {"cost_model", cost_to_json(cost)},
                     {"cost", row_cost(*res.counters, cost)}};
  if (cfg.emit_wall_time) art.summary["wall_time_ms"] = t1 - t0;
  write_artifacts(cfg, art, cost);
}

void run_race(const RunConfig& cfg) {
  const PortfolioInstance inst = expect_portfolio(cfg);
  const CostModel cost = resolve_cost(cfg.cost, inst);
  std::vector<RunTrace> traces(cfg.race_solvers.size());
  const long long t0 = now_ms();
  RaceResult res = race(inst, cfg.race_solvers, cfg.budget, cost,
                        cfg.trace_objective, traces.data());
  const long long t1 = now_ms();

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output dir " + cfg.out_dir);
  json entries = json::array();
  for (std::size_t i = 0; i < res.entries.size(); ++i) {
    const auto& e = res.entries[i];
    entries.push_back(json{{"solver", e.solver},
                           {"objective", e.objective},
                           {"cost", e.cost},
                           {"iterations", e.iterations},
                           {"counters", counters_to_json(e.counters)}});
    write_text_atomic(cfg.out_dir + "/trace_" + std::to_string(i) + "_" +
                          e.solver + ".csv",
                      trace_to_csv(traces[i], cost));
  }
  json summary{{"schema_version", 1},
               {"command", "race"},
               {"instance", cfg.instance_path},
               {"budget", res.budget},
               {"cost_model", cost_to_json(cost)},
               {"entries", entries},
               {"ratio", res.ratio}};
  if (cfg.emit_wall_time) summary["wall_time_ms"] = t1 - t0;
  write_text_atomic(cfg.out_dir + "/race.json", summary.dump(2) + "\n");
}

}  // namespace

void run(const RunConfig& cfg) {
  if (cfg.command == "gen-portfolio") {
    run_gen_portfolio(cfg);
  } else if (cfg.command == "gen-tv") {
    run_gen_tv(cfg);
  } else if (cfg.command == "solve-smooth") {
    run_solve_smooth(cfg);
  } else if (cfg.command == "solve-spp") {
    run_solve_spp(cfg);
  } else if (cfg.command == "solve-mags") {
    run_solve_mags(cfg);
  } else if (cfg.command == "solve-dyn") {
    run_solve_dyn(cfg);
  } else if (cfg.command == "race") {
    run_race(cfg);
  } else {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }
}

}  // namespace ags
