#pragma once

#include <Eigen/Dense>

#include "ags/rng.hpp"

namespace ags {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Which norm a geometry's strong-convexity modulus refers to.
enum class NormKind { l2, l1 };

// A distance-generating function pi together with the Bregman divergence
//   V(x,u) = pi(u) - pi(x) - <grad pi(x), u - x>,
// strongly convex with modulus nu w.r.t. the stated norm:
//   V(x,u) >= (nu/2) ||x-u||^2.
//
// Two geometries are provided:
//   euclidean: pi(u) = (1/2)||u||_2^2, so V(x,u) = (1/2)||u-x||_2^2,
//              nu = 1 w.r.t. l2.  Has quadratic growth (it IS a quadratic),
//              which the multi-stage solvers require.
//   entropy:   pi(u) = sum_i u_i ln u_i on the simplex, so
//              V(x,u) = sum_i u_i ln(u_i/x_i), nu = 1 w.r.t. l1
//              (Pinsker's inequality).  No quadratic growth.
struct BregmanGeometry {
  enum class Kind { euclidean, entropy };

  Kind kind = Kind::euclidean;
  double modulus = 1.0;  // nu
  NormKind norm = NormKind::l2;

  static BregmanGeometry Euclidean() {
    return {Kind::euclidean, 1.0, NormKind::l2};
  }
  static BregmanGeometry Entropy() {
    return {Kind::entropy, 1.0, NormKind::l1};
  }

  bool quadratic_growth() const { return kind == Kind::euclidean; }
};

// Norm associated with a geometry (the one its modulus refers to).
double geometry_norm(const BregmanGeometry& geom, const VectorXd& v);

// pi and grad pi, exposed so tests can rebuild V from first principles.
double prox_function_value(const BregmanGeometry& geom, const VectorXd& u);
VectorXd prox_function_gradient(const BregmanGeometry& geom, const VectorXd& u);

// V(x,u).  Entropy coordinates within -tol_feas of zero are treated as
// exact zeros (references floored at 1e-300 before logs, 0 ln 0 = 0);
// anything more negative or nonfinite raises EntropyDomainViolation.
double divergence(const BregmanGeometry& geom, const VectorXd& x,
                  const VectorXd& u);

// Feasible sets the prox solver knows closed forms (or a scalar root find)
// for.  Membership tests use the absolute tolerance tol_feas.
struct FeasibleSet {
  enum class Kind {
    whole_space,
    box,
    simplex,
    simplex_halfspace,   // { u in simplex : b'u >= eta }
    grouped_unit_balls,  // consecutive groups of 2, each ||.||_2 <= 1
  };

  static constexpr double tol_feas = 1e-9;

  Kind kind = Kind::whole_space;
  int dim = 0;
  VectorXd lo, hi;  // box bounds
  VectorXd b;       // halfspace normal
  double eta = 0.0; // halfspace offset
  int group_size = 2;

  static FeasibleSet WholeSpace(int n);
  static FeasibleSet Box(VectorXd lo, VectorXd hi);
  static FeasibleSet Simplex(int n);
  // Requires max_i b_i >= eta, otherwise the set is empty on the simplex.
  static FeasibleSet SimplexHalfspace(VectorXd b, double eta);
  static FeasibleSet GroupedUnitBalls(int n_groups);

  bool contains(const VectorXd& x, double tol = tol_feas) const;

  // A random feasible point (used by residual checks and smoothness probes).
  VectorXd sample(Rng& rng) const;

  int n_groups() const { return dim / group_size; }
};

// One composite prox step:
//   argmin_{u in set}  <linear, u> + beta V(anchor, u) + tau V(anchor_prev, u)
// with beta + tau > 0 and both anchors feasible.
struct ProxSubproblem {
  const VectorXd& linear;
  const VectorXd& anchor;       // weight beta
  const VectorXd& anchor_prev;  // weight tau
  double beta = 0.0;
  double tau = 0.0;
  const BregmanGeometry& geom;
  const FeasibleSet& set;
};

// Exact solver.  Supported pairings:
//   euclidean  x  whole_space | box | grouped_unit_balls
//   entropy    x  simplex | simplex_halfspace
// The halfspace case introduces one scalar multiplier found by bisection
// (bracket doubled from 1, at most 200 halvings); everything else is a
// closed form.  Solutions satisfy the three-point optimality residual below
// up to tol_prox (relative to beta + tau).
VectorXd solve_prox(const ProxSubproblem& sub);

constexpr double tol_prox = 1e-10;

// Three-point optimality residual.  For the true minimizer u* of
//   F(u) = <linear,u> + beta V(anchor,u) + tau V(anchor_prev,u)
// every feasible u satisfies
//   F(u*) <= F(u) - (beta+tau) V(u*, u),
// so residual(u*) = max_u sampled [ F(u*) - F(u) + (beta+tau) V(u*,u) ]
// (floored at 0) vanishes at the optimum and is positive at non-optima.
double prox_optimality_residual(const ProxSubproblem& sub,
                                const VectorXd& u_star, int samples = 64,
                                std::uint64_t seed = 20240901ull);

}  // namespace ags
