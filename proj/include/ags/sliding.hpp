#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ags/oracles.hpp"
#include "ags/schedule.hpp"

namespace ags {

// Per-outer-iteration record: counter snapshot AFTER the iteration, the
// movement of the averaged iterate, and (optionally) the objective at the
// averaged iterate.  Objective evaluations are diagnostics and are logged
// on a separate counter block, never on the headline one.
struct RunTrace {
  struct Row {
    int k = 0;
    OracleCounters counters;
    double step_norm = 0.0;  // ||xbar_k - xbar_{k-1}||_2
    std::optional<double> objective;
  };
  std::vector<Row> rows;
};

// Observer for the inner loop (t, u_t, utilde_t, usearch_t); used by tests
// to replay the recursions coefficient by coefficient.
using InnerObserver =
    std::function<void(int, const VectorXd&, const VectorXd&, const VectorXd&)>;

struct AgsOptions {
  bool validate = true;          // check schedule conditions lazily per k
  bool trace_objective = false;  // log f+h at xbar_k (diagnostic counters)
  std::shared_ptr<OracleCounters> counters;     // created when null
  std::shared_ptr<OracleCounters> diagnostics;  // created when null
  // Which headline channel each slot bumps.  Smoothing runs that swap the
  // roles of the two parts keep honest per-function counts this way.
  Channel f_channel = Channel::f;
  Channel h_channel = Channel::h;
  // Called before outer iteration k; return false to stop (budget races).
  std::function<bool(int, const OracleCounters&)> keep_going;
  InnerObserver observer;
};

struct AgsResult {
  VectorXd x_bar;
  RunTrace trace;
  int iterations = 0;
  std::shared_ptr<OracleCounters> counters;
  std::shared_ptr<OracleCounters> diagnostics;
};

// Inner procedure: T prox steps against the linearization g of the
// outer-loop part, re-linearizing the inner part each step.
//
//   utilde_0 = xbar, u_0 = x
//   for t = 1..T:
//     usearch_t = (1-lambda) xbar + lambda (1-alpha_t) utilde_{t-1}
//                 + lambda alpha_t u_{t-1}
//     u_t = argmin_{u in set} <g + grad h(usearch_t), u> + beta V(x, u)
//                              + (beta p_t + q_t) V(u_{t-1}, u)
//     utilde_t = (1-alpha_t) utilde_{t-1} + alpha_t u_t
//   return (u_T, utilde_T)
//
// Exactly one h-gradient per inner step.  gamma is accepted alongside
// lambda because the schedule conditions couple them; the recursion itself
// only reads lambda.
std::pair<VectorXd, VectorXd> prox_ag(
    const VectorXd& g_lin, const VectorXd& xbar, const VectorXd& x,
    double lambda, double beta, double gamma, int T,
    const std::function<double(int)>& alpha,
    const std::function<double(int)>& p, const std::function<double(int)>& q,
    const SmoothOracle& h, const BregmanGeometry& geom, const FeasibleSet& set,
    const InnerObserver& observer = {});

// Outer driver.  Per outer iteration: one f-gradient at the search point,
// one inner prox_ag pass (T_k h-gradients), then the averaging update
//   xbar_k = (1-lambda_k) xbar_{k-1} + lambda_k utilde.
// Throws ScheduleInvalid when validation is on and a condition fails.
AgsResult ags_run(const SmoothOracle& f, const SmoothOracle& h,
                  const BregmanGeometry& geom, const FeasibleSet& set,
                  const VectorXd& x0, int N, const AgsSchedule& sched,
                  const AgsOptions& opts = {});

// Single-loop accelerated baseline on the sum f + h, treated as one
// (L + M)-smooth function: one f-gradient and one h-gradient per iteration,
//   xsearch = (1-gamma_k) xbar_{k-1} + gamma_k x_{k-1},  gamma_k = 2/(k+1)
//   x_k = argmin <grad f + grad h, u> + (2(L+M)/(nu k)) V(x_{k-1}, u)
//   xbar_k = (1-gamma_k) xbar_{k-1} + gamma_k x_k
// Gap certificate: 4 (L+M) V(x0, x*) / (nu k (k+1)), i.e. constant C = 2/nu
// in the form 2 (L+M) V(x0, x*) C / k^2.
AgsResult nest_run(const SmoothOracle& f, const SmoothOracle& h,
                   const BregmanGeometry& geom, const FeasibleSet& set,
                   const VectorXd& x0, int N, const AgsOptions& opts = {});

}  // namespace ags
