#include "ags/multistage.hpp"

#include <cmath>

#include "ags/errors.hpp"

namespace ags {

namespace {

void append_stage(MagsResult& res, AgsResult&& stage) {
  for (auto& row : stage.trace.rows) {
    row.k = static_cast<int>(res.trace.rows.size()) + 1;
    res.trace.rows.push_back(std::move(row));
  }
  res.stage_points.push_back(stage.x_bar);
  res.v = std::move(stage.x_bar);
}

}  // namespace

StagePlan plan_mags(double L, double mu, double nu, double delta0,
                    double epsilon) {
  if (!(L > 0.0) || !(mu > 0.0) || !(nu > 0.0)) {
    throw InvalidConstants("plan_mags: L, mu, nu must be positive");
  }
  if (!(delta0 > 0.0) || !(epsilon > 0.0)) {
    throw InvalidConstants("plan_mags: delta0 and epsilon must be positive");
  }
  StagePlan plan;
  plan.delta0 = delta0;
  plan.epsilon = epsilon;
  plan.inner_budget =
      static_cast<int>(std::ceil(3.0 * std::sqrt(2.0 * L / (nu * mu))));
  const double halvings = delta0 / epsilon;
  plan.stages = halvings <= 1.0
                    ? 0
                    : static_cast<int>(std::ceil(std::log2(halvings)));
  return plan;
}

MagsResult mags_run(const SmoothOracle& f, const SmoothOracle& h,
                    const BregmanGeometry& geom, const FeasibleSet& set,
                    const VectorXd& v0, const StagePlan& plan,
                    const AgsOptions& opts) {
  if (!geom.quadratic_growth()) {
    throw GeometryNotQuadraticGrowth(
        "mags_run: restarts need a quadratic-growth prox-function "
        "(euclidean); entropy does not qualify");
  }
  if (!(f.strong_convexity > 0.0)) {
    throw InvalidConstants("mags_run: f must declare strong_convexity > 0");
  }
  MagsResult res;
  res.plan = plan;
  res.counters = opts.counters ? opts.counters
                               : std::make_shared<OracleCounters>();
  res.diagnostics = opts.diagnostics ? opts.diagnostics
                                     : std::make_shared<OracleCounters>();
  res.v = v0;
  if (plan.stages == 0) return res;

  const AgsSchedule sched = schedule_cor2(f.lipschitz, h.lipschitz,
                                          geom.modulus);
  AgsOptions stage_opts = opts;
  stage_opts.counters = res.counters;
  stage_opts.diagnostics = res.diagnostics;
  for (int s = 1; s <= plan.stages; ++s) {
    append_stage(res, ags_run(f, h, geom, set, res.v, plan.inner_budget,
                              sched, stage_opts));
  }
  return res;
}

MagsResult mags_dynamic_smoothing(const SaddleInstance& inst,
                                  const VectorXd& v0, double delta0,
                                  double epsilon,
                                  const BregmanGeometry& primal_geom,
                                  const AgsOptions& opts) {
  if (!primal_geom.quadratic_growth()) {
    throw GeometryNotQuadraticGrowth(
        "mags_dynamic_smoothing: needs a quadratic-growth primal geometry");
  }
  const double L = inst.f.lipschitz;
  const double mu = inst.f.strong_convexity;
  if (!(mu > 0.0)) {
    throw InvalidConstants(
        "mags_dynamic_smoothing: f must declare strong_convexity > 0");
  }
  if (!(delta0 > 0.0) || !(epsilon > 0.0)) {
    throw InvalidConstants(
        "mags_dynamic_smoothing: delta0 and epsilon must be positive");
  }
  const double kk = inst.K.norm_bound * inst.K.norm_bound;
  const double omega = inst.dual_geom.modulus;
  const double grow = std::max(std::sqrt(15.0 * delta0 / epsilon), 1.0);
  if (!(inst.Omega * kk * grow >= 2.0 * omega * delta0 * L)) {
    throw RegimeViolated(
        "mags_dynamic_smoothing: Omega ||K||^2 max{sqrt(15 delta0/eps),1} "
        "< 2 omega delta0 L");
  }

  MagsResult res;
  res.counters = opts.counters ? opts.counters
                               : std::make_shared<OracleCounters>();
  res.diagnostics = opts.diagnostics ? opts.diagnostics
                                     : std::make_shared<OracleCounters>();

  StagePlan plan;
  plan.delta0 = delta0;
  plan.epsilon = epsilon;
  plan.inner_budget =
      static_cast<int>(std::ceil(3.0 * std::sqrt(
          2.0 * L / (primal_geom.modulus * mu))));
  const double halvings = 15.0 * delta0 / epsilon;
  plan.stages = halvings <= 1.0
                    ? 0
                    : static_cast<int>(std::ceil(std::log2(halvings)));
  plan.rho0 = 4.0 * delta0 /
              (inst.Omega * std::pow(2.0, plan.stages / 2.0));
  res.plan = plan;
  res.v = v0;
  if (plan.stages == 0) return res;

  AgsOptions stage_opts = opts;
  stage_opts.counters = res.counters;
  stage_opts.diagnostics = res.diagnostics;
  for (int s = 1; s <= plan.stages; ++s) {
    const double rho_s = std::pow(2.0, -0.5 * s) * plan.rho0;
    const SmoothedObjective sm =
        make_smoothed(inst, rho_s, res.counters, res.diagnostics);
    // A freshly smoothed part can only be flatter than f on shallow stages;
    // a larger declared constant is still valid, so clamp to keep M >= L.
    const double m_eff = std::max(sm.M, L);
    const AgsSchedule sched = schedule_cor2(L, m_eff, primal_geom.modulus);
    append_stage(res, ags_run(inst.f, sm.h_rho, primal_geom, inst.X, res.v,
                              plan.inner_budget, sched, stage_opts));
    res.stage_rho.push_back(rho_s);
  }
  return res;
}

}  // namespace ags
