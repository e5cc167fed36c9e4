#include "ags/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "ags/errors.hpp"

namespace ags {

SmoothOracle counted(const SmoothOracle& oracle,
                     std::shared_ptr<OracleCounters> counters,
                     Channel channel) {
  SmoothOracle out = oracle;
  auto grad = oracle.gradient;
  out.gradient = [grad, counters, channel](const VectorXd& x) {
    if (counters) {
      if (channel == Channel::f) {
        ++counters->n_grad_f;
      } else {
        ++counters->n_grad_h;
      }
    }
    return grad(x);
  };
  return out;
}

LinearOperator counted_operator(const LinearOperator& op,
                                std::shared_ptr<OracleCounters> counters) {
  LinearOperator out = op;
  auto fwd = op.apply;
  auto adj = op.apply_adjoint;
  out.apply = [fwd, counters](const VectorXd& v) {
    if (counters) ++counters->n_apply_K;
    return fwd(v);
  };
  out.apply_adjoint = [adj, counters](const VectorXd& v) {
    if (counters) ++counters->n_apply_Kt;
    return adj(v);
  };
  return out;
}

VectorXd finite_difference_gradient(const SmoothOracle& oracle,
                                    const VectorXd& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  VectorXd g(x.size());
  VectorXd probe = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = oracle.value(probe);
    probe[i] = xi - h;
    const double fm = oracle.value(probe);
    probe[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

SmoothnessReport check_smoothness(const SmoothOracle& oracle,
                                  const FeasibleSet& set, int samples,
                                  std::uint64_t seed, NormKind norm) {
  SmoothnessReport rep;
  Rng rng(seed);
  const double L = oracle.lipschitz;
  const double mu = oracle.strong_convexity;
  const int fd_probes = std::min(samples, 20);

  for (int i = 0; i < samples; ++i) {
    const VectorXd u = set.sample(rng);
    const VectorXd x = set.sample(rng);
    const VectorXd d = x - u;
    const double dist =
        norm == NormKind::l1 ? d.lpNorm<1>() : d.norm();
    const double gap =
        oracle.value(x) - oracle.value(u) - oracle.gradient(u).dot(d);
    rep.max_violation_upper =
        std::max(rep.max_violation_upper, gap - 0.5 * L * dist * dist);
    rep.max_violation_lower =
        std::max(rep.max_violation_lower, 0.5 * mu * dist * dist - gap);
    if (i < fd_probes) {
      const VectorXd g = oracle.gradient(x);
      const VectorXd fd = finite_difference_gradient(oracle, x);
      const double rel = (fd - g).norm() / (1.0 + g.norm());
      rep.max_grad_rel_err = std::max(rep.max_grad_rel_err, rel);
    }
  }
  return rep;
}

}  // namespace ags
