#pragma once

#include <memory>

#include "ags/sliding.hpp"

namespace ags {

// Bilinear saddle-point problem
//   min_{x in X}  psi(x) = f(x) + max_{y in Y} { <Kx, y> - J(y) }
// with f smooth convex and J either zero or a diagonal quadratic
// (1/2) y' diag(Jdiag) y.  Smoothing replaces the max by
//   h_rho(x) = max_{y in Y} { <Kx, y> - J(y) - rho W(y0, y) },
// where W is the dual prox-function with modulus omega and
//   Omega >= max_{y in Y} W(y0, y).
struct SaddleInstance {
  SmoothOracle f;
  LinearOperator K;
  FeasibleSet X;  // primal domain
  FeasibleSet Y;  // dual domain
  BregmanGeometry dual_geom;  // W, modulus omega
  VectorXd y0;
  double Omega = 0.0;
  VectorXd Jdiag;  // empty => J == 0
};

// Analytic dual radius for the supported (Y, W, y0) combinations:
//   grouped unit balls + euclidean W, y0 = 0: (#groups)/2
//   simplex + entropy W, y0 uniform:          ln(dim)
double dual_radius(const FeasibleSet& Y, const BregmanGeometry& dual_geom,
                   const VectorXd& y0);

// y*(x) = argmax_{y in Y} <Kx,y> - J(y) - rho W(y0,y).  Costs one K apply
// (booked on `counters` when given).  Supported combinations:
//   grouped unit balls + euclidean W (J zero or diagonal quadratic)
//   simplex + entropy W (J zero)
VectorXd dual_maximizer(const SaddleInstance& inst, double rho,
                        const VectorXd& x,
                        OracleCounters* counters = nullptr);

// grad h_rho(x) = K' y*(x): one K apply + one K' apply.
VectorXd smoothed_grad(const SaddleInstance& inst, double rho,
                       const VectorXd& x, OracleCounters* counters = nullptr);

// The smooth approximation h_rho packaged as an oracle with
// M = ||K||^2 / (rho omega).  Gradient calls book one K apply and one K'
// apply on `main`; value calls (diagnostics) book their K apply on `diag`.
// Null counter blocks mean "don't count".
struct SmoothedObjective {
  double rho = 0.0;
  double M = 0.0;
  SmoothOracle h_rho;
};

SmoothedObjective make_smoothed(const SaddleInstance& inst, double rho,
                                std::shared_ptr<OracleCounters> main,
                                std::shared_ptr<OracleCounters> diag);

// Exact psi(x) for J == 0: f(x) plus the support function of Y at Kx
// (sum of group norms for grouped balls, max coordinate for the simplex).
double psi_exact(const SaddleInstance& inst, const VectorXd& x);

// Exact nonsmooth part max_{y in Y} <z, y> for J == 0.
double support_function(const FeasibleSet& Y, const VectorXd& z);

struct SppOptions {
  // Upper bound on V(x0, x*) for the primal geometry.  Negative means
  // "derive from the set" (simplex: ln n; box: 1; required otherwise).
  double radius_sq = -1.0;
  bool trace_objective = false;
  std::shared_ptr<OracleCounters> counters;
  std::shared_ptr<OracleCounters> diagnostics;
};

struct SppResult {
  VectorXd x_bar;
  RunTrace trace;
  double rho = 0.0;     // smoothing weight used
  double M = 0.0;       // smoothness constant of h_rho
  int N = 0;            // outer iterations run
  bool roles_swapped = false;
  std::shared_ptr<OracleCounters> counters;
  std::shared_ptr<OracleCounters> diagnostics;
};

// One-shot smoothing solver targeting psi(x) - psi* <= epsilon:
//   rho = epsilon / (2 Omega), M = ||K||^2/(rho omega),
//   N = least N with 9 L R^2 / (nu N (N+1)) <= epsilon/2,
// run with the geometric-inner-loop schedule.  Requires the smoothing
// regime 2 ||K||^2 Omega > epsilon omega L; otherwise the roles of f and
// h_rho are swapped (f drives the inner loop) and the result is flagged.
SppResult solve_spp(const SaddleInstance& inst, const VectorXd& x0,
                    double epsilon, const BregmanGeometry& primal_geom,
                    const SppOptions& opts = {});

}  // namespace ags
