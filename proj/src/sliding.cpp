#include "ags/sliding.hpp"

#include <cmath>
#include <sstream>

#include "ags/errors.hpp"

namespace ags {

namespace {

std::string describe(const ScheduleViolation& v) {
  std::ostringstream os;
  os << "k=" << v.k << " t=" << v.t << " [" << v.condition
     << "] lhs=" << v.lhs << " rhs=" << v.rhs;
  return os.str();
}

void maybe_trace(RunTrace& trace, int k, const OracleCounters& counters,
                 double step_norm, bool want_objective,
                 const SmoothOracle& f, const SmoothOracle& h,
                 const VectorXd& xbar) {
  RunTrace::Row row;
  row.k = k;
  row.counters = counters;
  row.step_norm = step_norm;
  if (want_objective) row.objective = f.value(xbar) + h.value(xbar);
  trace.rows.push_back(std::move(row));
}

}  // namespace

std::pair<VectorXd, VectorXd> prox_ag(
    const VectorXd& g_lin, const VectorXd& xbar, const VectorXd& x,
    double lambda, double beta, double gamma, int T,
    const std::function<double(int)>& alpha,
    const std::function<double(int)>& p, const std::function<double(int)>& q,
    const SmoothOracle& h, const BregmanGeometry& geom, const FeasibleSet& set,
    const InnerObserver& observer) {
  (void)gamma;  // coupled to lambda through the schedule conditions only
  VectorXd utilde = xbar;
  VectorXd u = x;
  VectorXd usearch(set.dim), linear(set.dim);
  for (int t = 1; t <= T; ++t) {
    const double a = alpha(t);
    usearch = (1.0 - lambda) * xbar + lambda * (1.0 - a) * utilde +
              lambda * a * u;
    linear = g_lin + h.gradient(usearch);
    const double tau = beta * p(t) + q(t);
    VectorXd next =
        solve_prox({linear, x, u, beta, tau, geom, set});
    utilde = (1.0 - a) * utilde + a * next;
    u = std::move(next);
    if (observer) observer(t, u, utilde, usearch);
  }
  return {u, utilde};
}

AgsResult ags_run(const SmoothOracle& f, const SmoothOracle& h,
                  const BregmanGeometry& geom, const FeasibleSet& set,
                  const VectorXd& x0, int N, const AgsSchedule& sched,
                  const AgsOptions& opts) {
  if (!set.contains(x0)) throw NonFeasiblePoint("ags_run: x0 infeasible");
  AgsResult res;
  res.counters = opts.counters ? opts.counters
                               : std::make_shared<OracleCounters>();
  res.diagnostics = opts.diagnostics ? opts.diagnostics
                                     : std::make_shared<OracleCounters>();
  const SmoothOracle fc = counted(f, res.counters, opts.f_channel);
  const SmoothOracle hc = counted(h, res.counters, opts.h_channel);

  VectorXd xbar = x0;
  VectorXd x = x0;
  VectorXd xsearch(set.dim);
  for (int k = 1; k <= N; ++k) {
    if (opts.keep_going && !opts.keep_going(k, *res.counters)) break;
    if (opts.validate) {
      auto violations =
          validate_schedule_at(sched, sched.L, sched.M, sched.nu, k);
      if (!violations.empty()) {
        throw ScheduleInvalid("ags_run: schedule condition failed: " +
                              describe(violations.front()));
      }
    }
    const double gamma_k = sched.gamma(k);
    const double lambda_k = sched.lambda(k);
    xsearch = (1.0 - gamma_k) * xbar + gamma_k * x;
    const VectorXd g_lin = fc.gradient(xsearch);
    auto [x_next, xtilde] = prox_ag(
        g_lin, xbar, x, lambda_k, sched.beta(k), gamma_k,
        sched.inner_steps(k), [&](int t) { return sched.alpha(k, t); },
        [&](int t) { return sched.p(k, t); },
        [&](int t) { return sched.q(k, t); }, hc, geom, set, opts.observer);
    x = std::move(x_next);
    VectorXd xbar_next = (1.0 - lambda_k) * xbar + lambda_k * xtilde;
    const double step = (xbar_next - xbar).norm();
    xbar = std::move(xbar_next);
    ++res.iterations;
    // Objective evaluations are diagnostics; oracles bound to the
    // diagnostic block (e.g. smoothed ones) book their work there.
    maybe_trace(res.trace, k, *res.counters, step, opts.trace_objective, f, h,
                xbar);
  }
  res.x_bar = std::move(xbar);
  return res;
}

AgsResult nest_run(const SmoothOracle& f, const SmoothOracle& h,
                   const BregmanGeometry& geom, const FeasibleSet& set,
                   const VectorXd& x0, int N, const AgsOptions& opts) {
  if (!set.contains(x0)) throw NonFeasiblePoint("nest_run: x0 infeasible");
  AgsResult res;
  res.counters = opts.counters ? opts.counters
                               : std::make_shared<OracleCounters>();
  res.diagnostics = opts.diagnostics ? opts.diagnostics
                                     : std::make_shared<OracleCounters>();
  const SmoothOracle fc = counted(f, res.counters, opts.f_channel);
  const SmoothOracle hc = counted(h, res.counters, opts.h_channel);
  const double l_total = f.lipschitz + h.lipschitz;
  const double nu = geom.modulus;

  VectorXd xbar = x0;
  VectorXd x = x0;
  VectorXd xsearch(set.dim);
  const VectorXd unused = x0;  // tau = 0, second anchor is ignored
  for (int k = 1; k <= N; ++k) {
    if (opts.keep_going && !opts.keep_going(k, *res.counters)) break;
    const double gamma_k = 2.0 / (k + 1);
    xsearch = (1.0 - gamma_k) * xbar + gamma_k * x;
    const VectorXd grad = fc.gradient(xsearch) + hc.gradient(xsearch);
    const double eta_k = 2.0 * l_total / (nu * k);
    x = solve_prox({grad, x, unused, eta_k, 0.0, geom, set});
    VectorXd xbar_next = (1.0 - gamma_k) * xbar + gamma_k * x;
    const double step = (xbar_next - xbar).norm();
    xbar = std::move(xbar_next);
    ++res.iterations;
    maybe_trace(res.trace, k, *res.counters, step, opts.trace_objective, f, h,
                xbar);
  }
  res.x_bar = std::move(xbar);
  return res;
}

}  // namespace ags
