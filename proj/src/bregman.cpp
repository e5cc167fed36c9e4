#include "ags/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ags/errors.hpp"

namespace ags {

namespace {

constexpr double kEntropyFloor = 1e-300;

// Floor for entropy reference points.  Rounding noise down to -tol_feas is
// forgiven and floored; anything genuinely negative or nonfinite is a
// domain violation.
double floored(double v) {
  if (!std::isfinite(v) || v < -FeasibleSet::tol_feas) {
    throw EntropyDomainViolation(
        "entropy reference point has a negative or nonfinite component");
  }
  return std::max(v, kEntropyFloor);
}

void require_same_dim(const VectorXd& a, const VectorXd& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

double geometry_norm(const BregmanGeometry& geom, const VectorXd& v) {
  return geom.norm == NormKind::l1 ? v.lpNorm<1>() : v.norm();
}

double prox_function_value(const BregmanGeometry& geom, const VectorXd& u) {
  if (geom.kind == BregmanGeometry::Kind::euclidean) {
    return 0.5 * u.squaredNorm();
  }
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0) s += u[i] * std::log(u[i]);
    // u_i = 0 contributes 0 (limit of u ln u).
  }
  return s;
}

VectorXd prox_function_gradient(const BregmanGeometry& geom,
                                const VectorXd& u) {
  if (geom.kind == BregmanGeometry::Kind::euclidean) return u;
  VectorXd g(u.size());
  for (int i = 0; i < u.size(); ++i) g[i] = 1.0 + std::log(floored(u[i]));
  return g;
}

double divergence(const BregmanGeometry& geom, const VectorXd& x,
                  const VectorXd& u) {
  require_same_dim(x, u, "divergence");
  if (geom.kind == BregmanGeometry::Kind::euclidean) {
    return 0.5 * (u - x).squaredNorm();
  }
  // sum_i u_i ln(u_i / x_i); 0 ln 0 = 0, reference floored at 1e-300.
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = floored(x[i]);
    if (!std::isfinite(u[i]) || u[i] < -FeasibleSet::tol_feas) {
      throw EntropyDomainViolation(
          "entropy divergence target has a negative or nonfinite component");
    }
    if (u[i] > 0.0) s += u[i] * (std::log(u[i]) - std::log(xi));
  }
  if (!std::isfinite(s)) {
    throw NumericalOverflow("divergence: nonfinite accumulation");
  }
  return std::max(s, 0.0);
}

// ---- FeasibleSet ----

FeasibleSet FeasibleSet::WholeSpace(int n) {
  FeasibleSet s;
  s.kind = Kind::whole_space;
  s.dim = n;
  return s;
}

FeasibleSet FeasibleSet::Box(VectorXd lo, VectorXd hi) {
  if (lo.size() != hi.size()) throw DimensionError("box: lo/hi size mismatch");
  for (int i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw InvalidConstants("box: lo > hi");
  }
  FeasibleSet s;
  s.kind = Kind::box;
  s.dim = static_cast<int>(lo.size());
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

FeasibleSet FeasibleSet::Simplex(int n) {
  if (n < 1) throw InvalidConstants("simplex: dimension must be >= 1");
  FeasibleSet s;
  s.kind = Kind::simplex;
  s.dim = n;
  return s;
}

FeasibleSet FeasibleSet::SimplexHalfspace(VectorXd b, double eta) {
  if (b.size() < 1) throw InvalidConstants("simplex_halfspace: empty b");
  if (!(b.maxCoeff() >= eta)) {
    throw InvalidConstants(
        "simplex_halfspace: max_i b_i < eta leaves the set empty");
  }
  FeasibleSet s;
  s.kind = Kind::simplex_halfspace;
  s.dim = static_cast<int>(b.size());
  s.b = std::move(b);
  s.eta = eta;
  return s;
}

FeasibleSet FeasibleSet::GroupedUnitBalls(int n_groups) {
  if (n_groups < 1) throw InvalidConstants("grouped_unit_balls: no groups");
  FeasibleSet s;
  s.kind = Kind::grouped_unit_balls;
  s.dim = 2 * n_groups;
  s.group_size = 2;
  return s;
}

bool FeasibleSet::contains(const VectorXd& x, double tol) const {
  if (x.size() != dim) return false;
  switch (kind) {
    case Kind::whole_space:
      return x.allFinite();
    case Kind::box:
      for (int i = 0; i < dim; ++i) {
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
      }
      return true;
    case Kind::simplex: {
      if (x.minCoeff() < -tol) return false;
      return std::abs(x.sum() - 1.0) <= tol;
    }
    case Kind::simplex_halfspace: {
      if (x.minCoeff() < -tol) return false;
      if (std::abs(x.sum() - 1.0) > tol) return false;
      return b.dot(x) >= eta - tol;
    }
    case Kind::grouped_unit_balls: {
      for (int g = 0; g < n_groups(); ++g) {
        if (x.segment(group_size * g, group_size).norm() > 1.0 + tol) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

VectorXd FeasibleSet::sample(Rng& rng) const {
  VectorXd x(dim);
  switch (kind) {
    case Kind::whole_space:
      for (int i = 0; i < dim; ++i) x[i] = rng.normal();
      return x;
    case Kind::box:
      for (int i = 0; i < dim; ++i) x[i] = rng.uniform(lo[i], hi[i]);
      return x;
    case Kind::simplex: {
      // Normalized exponentials ~ Dirichlet(1,...,1).
      double s = 0.0;
      for (int i = 0; i < dim; ++i) {
        double u = rng.uniform01();
        while (u <= 0.0) u = rng.uniform01();
        x[i] = -std::log(u);
        s += x[i];
      }
      return x / s;
    }
    case Kind::simplex_halfspace: {
      FeasibleSet inner = Simplex(dim);
      int best = 0;
      b.maxCoeff(&best);
      for (int attempt = 0; attempt < 64; ++attempt) {
        VectorXd cand = inner.sample(rng);
        if (b.dot(cand) >= eta) return cand;
      }
      // Blend the last candidate toward the vertex with the largest b.
      VectorXd cand = inner.sample(rng);
      const double bc = b.dot(cand);
      if (bc >= eta) return cand;
      const double bmax = b[best];
      // t solves b'((1-t)cand + t e_best) = eta when bmax > eta.
      double t = bmax > eta ? (eta - bc) / (bmax - bc) : 1.0;
      t = std::clamp(t, 0.0, 1.0);
      VectorXd vertex = VectorXd::Zero(dim);
      vertex[best] = 1.0;
      return (1.0 - t) * cand + t * vertex;
    }
    case Kind::grouped_unit_balls: {
      for (int g = 0; g < n_groups(); ++g) {
        const double a = rng.uniform(0.0, 6.283185307179586476925286766559);
        const double r = std::sqrt(rng.uniform01());
        x[2 * g] = r * std::cos(a);
        x[2 * g + 1] = r * std::sin(a);
      }
      return x;
    }
  }
  throw SolverError("sample: unknown set kind");
}

// ---- solve_prox ----

namespace {

// Entropy geometry on the simplex: the minimizer is the normalized
// exponential of
//   s_i = (beta ln x_i + tau ln xprev_i - linear_i) / (beta + tau),
// evaluated in log space with max subtraction so nothing overflows.
VectorXd entropy_simplex_prox(const VectorXd& linear, const VectorXd& x,
                              double beta, const VectorXd& xprev, double tau) {
  const int n = static_cast<int>(linear.size());
  const double denom = beta + tau;
  // A zero anchor coordinate pins the divergence to +inf off that face, so
  // the minimizer has an exact zero there; drop it from the softmax.
  std::vector<char> dead(n, 0);
  VectorXd s(n);
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double acc = -linear[i];
    if (beta > 0.0) {
      const double xi = floored(x[i]);
      if (xi <= kEntropyFloor) {
        dead[i] = 1;
        continue;
      }
      acc += beta * std::log(xi);
    }
    if (tau > 0.0) {
      const double xpi = floored(xprev[i]);
      if (xpi <= kEntropyFloor) {
        dead[i] = 1;
        continue;
      }
      acc += tau * std::log(xpi);
    }
    s[i] = acc / denom;
    if (std::isnan(s[i])) {
      throw NumericalOverflow("entropy prox: nonfinite log-space exponent");
    }
    m = std::max(m, s[i]);
  }
  VectorXd w(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = dead[i] ? 0.0 : std::exp(s[i] - m);
    z += w[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw NumericalOverflow("entropy prox: normalizer underflowed to zero");
  }
  return w / z;
}

}  // namespace

VectorXd solve_prox(const ProxSubproblem& sub) {
  const VectorXd& l = sub.linear;
  const VectorXd& x = sub.anchor;
  const VectorXd& xp = sub.anchor_prev;
  const double beta = sub.beta;
  const double tau = sub.tau;
  const FeasibleSet& set = sub.set;

  if (l.size() != set.dim || x.size() != set.dim || xp.size() != set.dim) {
    throw DimensionError("solve_prox: vector sizes do not match set.dim");
  }
  if (!(beta >= 0.0) || !(tau >= 0.0) || !(beta + tau > 0.0)) {
    throw InvalidConstants("solve_prox: needs beta, tau >= 0 and beta+tau > 0");
  }
  if (!set.contains(x)) throw NonFeasiblePoint("solve_prox: anchor infeasible");
  if (!set.contains(xp)) {
    throw NonFeasiblePoint("solve_prox: previous anchor infeasible");
  }

  const bool euclid = sub.geom.kind == BregmanGeometry::Kind::euclidean;

  switch (set.kind) {
    case FeasibleSet::Kind::whole_space: {
      if (!euclid) {
        throw InvalidConstants("solve_prox: whole_space needs euclidean");
      }
      return (beta * x + tau * xp - l) / (beta + tau);
    }
    case FeasibleSet::Kind::box: {
      if (!euclid) throw InvalidConstants("solve_prox: box needs euclidean");
      VectorXd u = (beta * x + tau * xp - l) / (beta + tau);
      for (int i = 0; i < u.size(); ++i) {
        u[i] = std::clamp(u[i], set.lo[i], set.hi[i]);
      }
      return u;
    }
    case FeasibleSet::Kind::grouped_unit_balls: {
      if (!euclid) {
        throw InvalidConstants("solve_prox: grouped balls need euclidean");
      }
      VectorXd u = (beta * x + tau * xp - l) / (beta + tau);
      for (int g = 0; g < set.n_groups(); ++g) {
        auto seg = u.segment(set.group_size * g, set.group_size);
        const double norm = seg.norm();
        if (norm > 1.0) seg /= norm;  // zero groups stay exactly zero
      }
      return u;
    }
    case FeasibleSet::Kind::simplex: {
      if (euclid) throw InvalidConstants("solve_prox: simplex needs entropy");
      return entropy_simplex_prox(l, x, beta, xp, tau);
    }
    case FeasibleSet::Kind::simplex_halfspace: {
      if (euclid) {
        throw InvalidConstants("solve_prox: simplex_halfspace needs entropy");
      }
      // KKT: with multiplier theta >= 0 on b'u >= eta the minimizer is the
      // simplex prox with linear term l - theta b, and b'u(theta) is
      // nondecreasing in theta.  theta = 0 if the constraint is slack.
      auto solve_at = [&](double theta) {
        return entropy_simplex_prox(l - theta * sub.set.b, x, beta, xp, tau);
      };
      VectorXd u0 = solve_at(0.0);
      if (set.b.dot(u0) >= set.eta) return u0;
      double lo_t = 0.0, hi_t = 1.0;
      bool bracketed = false;
      for (int i = 0; i < 200; ++i) {
        if (set.b.dot(solve_at(hi_t)) >= set.eta) {
          bracketed = true;
          break;
        }
        lo_t = hi_t;
        hi_t *= 2.0;
      }
      if (!bracketed) {
        throw BisectionFailed(
            "solve_prox: halfspace multiplier bracket not found");
      }
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo_t + hi_t);
        if (set.b.dot(solve_at(mid)) >= set.eta) {
          hi_t = mid;
        } else {
          lo_t = mid;
        }
        if (hi_t - lo_t <= 1e-16 * std::max(1.0, hi_t)) break;
      }
      return solve_at(hi_t);
    }
  }
  throw SolverError("solve_prox: unknown set kind");
}

double prox_optimality_residual(const ProxSubproblem& sub,
                                const VectorXd& u_star, int samples,
                                std::uint64_t seed) {
  const auto objective = [&](const VectorXd& u) {
    return sub.linear.dot(u) + sub.beta * divergence(sub.geom, sub.anchor, u) +
           sub.tau * divergence(sub.geom, sub.anchor_prev, u);
  };
  const double f_star = objective(u_star);
  const double w = sub.beta + sub.tau;
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    VectorXd u = sub.set.sample(rng);
    const double slack =
        f_star - objective(u) + w * divergence(sub.geom, u_star, u);
    worst = std::max(worst, slack);
  }
  return worst;
}

}  // namespace ags
