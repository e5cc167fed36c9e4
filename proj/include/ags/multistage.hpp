#pragma once

#include "ags/saddle.hpp"
#include "ags/sliding.hpp"

namespace ags {

// Restart plan for strongly convex problems.
//   inner_budget N0 = ceil(3 sqrt(2 L / (nu mu)))  -- halves the gap per stage
//   stages       S  = ceil(log2(max{delta0 / epsilon, 1}))
// delta0 must upper-bound the initial gap; S = 0 means v0 already qualifies.
struct StagePlan {
  int inner_budget = 0;  // N0
  int stages = 0;        // S
  double delta0 = 0.0;
  double epsilon = 0.0;
  double rho0 = 0.0;  // used by the dynamic-smoothing variant only
};

StagePlan plan_mags(double L, double mu, double nu, double delta0,
                    double epsilon);

struct MagsResult {
  VectorXd v;
  RunTrace trace;  // stages concatenated, k renumbered contiguously
  StagePlan plan;
  std::vector<VectorXd> stage_points;  // v_1..v_S
  std::vector<double> stage_rho;       // dynamic smoothing only
  std::shared_ptr<OracleCounters> counters;
  std::shared_ptr<OracleCounters> diagnostics;
};

// Multi-stage sliding: S restarts of the two-loop solver, each warm-started
// at the previous stage's output and run for N0 outer iterations with the
// geometric-inner-loop schedule.  Guarantees gap(v_s) <= delta0 2^{-s} when
// delta0 is a valid initial bound, hence gap(v_S) <= epsilon.
//
// Requires a geometry with quadratic growth (euclidean); entropy is
// rejected with GeometryNotQuadraticGrowth.  f must declare mu > 0.
MagsResult mags_run(const SmoothOracle& f, const SmoothOracle& h,
                    const BregmanGeometry& geom, const FeasibleSet& set,
                    const VectorXd& v0, const StagePlan& plan,
                    const AgsOptions& opts = {});

// Dynamic smoothing for strongly convex saddle problems: the smoothing
// weight decays geometrically across stages,
//   S = ceil(log2(max{15 delta0 / epsilon, 1})),
//   rho_0 = 4 delta0 / (Omega 2^{S/2}),  rho_s = 2^{-s/2} rho_0,
// and stage s runs N0 outer iterations on f + h_{rho_s}.  Requires the
// regime Omega ||K||^2 max{sqrt(15 delta0/epsilon), 1} >= 2 omega delta0 L
// (RegimeViolated otherwise) and guarantees psi(v_S) - psi* <= epsilon via
// the telescoped bound 2^S (psi(v_S) - psi*) <= 15 delta0.
MagsResult mags_dynamic_smoothing(const SaddleInstance& inst,
                                  const VectorXd& v0, double delta0,
                                  double epsilon,
                                  const BregmanGeometry& primal_geom,
                                  const AgsOptions& opts = {});

}  // namespace ags
