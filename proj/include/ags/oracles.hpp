#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "ags/bregman.hpp"

namespace ags {

// First-order oracle for a smooth convex function.
//   value(x), gradient(x), a Lipschitz constant for the gradient, and an
//   optional strong-convexity modulus (both w.r.t. the norm of whatever
//   geometry the caller pairs the oracle with).
struct SmoothOracle {
  std::function<double(const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&)> gradient;
  double lipschitz = 0.0;
  double strong_convexity = 0.0;
};

// Complexity ledger.  One gradient call increments its channel by exactly
// one; value() calls are free.  Operator applications are tracked separately
// so smoothing-based runs can report them.
struct OracleCounters {
  std::uint64_t n_grad_f = 0;
  std::uint64_t n_grad_h = 0;
  std::uint64_t n_apply_K = 0;
  std::uint64_t n_apply_Kt = 0;

  void reset() { *this = OracleCounters{}; }
};

enum class Channel { f, h };

// Wrap an oracle so each gradient call bumps the chosen channel.  The
// returned oracle shares ownership of the counter block, so it stays valid
// wherever it is moved.
SmoothOracle counted(const SmoothOracle& oracle,
                     std::shared_ptr<OracleCounters> counters,
                     Channel channel);

// A (possibly rectangular) linear map with adjoint and an operator-norm
// upper bound.
struct LinearOperator {
  std::function<VectorXd(const VectorXd&)> apply;          // R^cols -> R^rows
  std::function<VectorXd(const VectorXd&)> apply_adjoint;  // R^rows -> R^cols
  int rows = 0;
  int cols = 0;
  double norm_bound = 0.0;  // ||K|| <= norm_bound
};

// Wrap an operator so apply / apply_adjoint bump n_apply_K / n_apply_Kt.
LinearOperator counted_operator(const LinearOperator& op,
                                std::shared_ptr<OracleCounters> counters);

// Empirical audit of an oracle's declared constants over a feasible set.
//
//   upper: value(x) - value(u) - <grad(u), x-u> <= (L/2)||x-u||^2
//   lower: value(x) - value(u) - <grad(u), x-u> >= (mu/2)||x-u||^2
//   grad : central finite differences vs gradient()
//
// Violations are reported as max over sampled pairs of the amount by which
// the inequality fails (0 when it holds).  The norm defaults to l2; pass the
// geometry's norm kind when auditing constants declared for l1.
struct SmoothnessReport {
  double max_violation_upper = 0.0;
  double max_violation_lower = 0.0;
  double max_grad_rel_err = 0.0;
};

SmoothnessReport check_smoothness(const SmoothOracle& oracle,
                                  const FeasibleSet& set, int samples,
                                  std::uint64_t seed,
                                  NormKind norm = NormKind::l2);

// Central finite-difference gradient with h = 1e-6 (1 + ||x||_2).
VectorXd finite_difference_gradient(const SmoothOracle& oracle,
                                    const VectorXd& x);

}  // namespace ags
