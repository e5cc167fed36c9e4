#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ags/bregman.hpp"
#include "ags/errors.hpp"

using namespace ags;

namespace {

// Test-local rebuild of the divergence from its definition, kept separate
// from the library code paths on purpose.
double ref_entropy_div(const VectorXd& x, const VectorXd& u) {
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] > 0.0) s += u[i] * std::log(u[i] / x[i]);
  }
  return s;
}

double ref_prox_objective(const ProxSubproblem& sub, const VectorXd& u) {
  auto div = [&](const VectorXd& a, const VectorXd& w) {
    if (sub.geom.kind == BregmanGeometry::Kind::entropy) {
      return ref_entropy_div(a, w);
    }
    return 0.5 * (w - a).squaredNorm();
  };
  return sub.linear.dot(u) + sub.beta * div(sub.anchor, u) +
         sub.tau * div(sub.anchor_prev, u);
}

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Brute-force minimizer of the prox objective over the 2-simplex
// (parametrized by two barycentric coordinates), refined in three zoom
// passes.  Independent of solve_prox.
VectorXd grid_min_simplex3(const ProxSubproblem& sub) {
  double lo1 = 0.0, hi1 = 1.0, lo2 = 0.0, hi2 = 1.0;
  VectorXd best(3);
  for (int pass = 0; pass < 3; ++pass) {
    double best_val = 1e300;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double a = lo1 + (hi1 - lo1) * i / n;
        const double b = lo2 + (hi2 - lo2) * j / n;
        if (a + b > 1.0) continue;
        VectorXd u = vec({a, b, 1.0 - a - b});
        const double val = ref_prox_objective(sub, u);
        if (val < best_val) {
          best_val = val;
          best = u;
        }
      }
    }
    const double w1 = (hi1 - lo1) / n, w2 = (hi2 - lo2) / n;
    lo1 = std::max(0.0, best[0] - 2 * w1);
    hi1 = std::min(1.0, best[0] + 2 * w1);
    lo2 = std::max(0.0, best[1] - 2 * w2);
    hi2 = std::min(1.0, best[1] + 2 * w2);
  }
  return best;
}

}  // namespace

TEST_CASE("euclidean divergence is half squared distance") {
  const auto geom = BregmanGeometry::Euclidean();
  CHECK(divergence(geom, vec({1.0, -2.0}), vec({4.0, 2.0})) ==
        doctest::Approx(12.5).epsilon(1e-15));
  CHECK(divergence(geom, vec({0.3, 0.7}), vec({0.3, 0.7})) ==
        doctest::Approx(0.0));
}

TEST_CASE("entropy divergence matches hand value and definition") {
  const auto geom = BregmanGeometry::Entropy();
  const VectorXd x = vec({0.5, 0.5});
  const VectorXd u = vec({0.25, 0.75});
  CHECK(divergence(geom, x, u) ==
        doctest::Approx(0.13081203594113697).epsilon(1e-14));

  // Rebuild from pi(u) - pi(x) - <grad pi(x), u - x>.
  const double rebuilt = prox_function_value(geom, u) -
                         prox_function_value(geom, x) -
                         prox_function_gradient(geom, x).dot(u - x);
  CHECK(divergence(geom, x, u) == doctest::Approx(rebuilt).epsilon(1e-12));
}

TEST_CASE("entropy divergence handles zero target coordinates") {
  const auto geom = BregmanGeometry::Entropy();
  // 0 ln 0 = 0 by convention; value reduces to the surviving terms.
  const double v = divergence(geom, vec({0.5, 0.5}), vec({0.0, 1.0}));
  CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("entropy divergence rejects negative coordinates") {
  const auto geom = BregmanGeometry::Entropy();
  CHECK_THROWS_AS(divergence(geom, vec({0.5, 0.5}), vec({-0.1, 1.1})),
                  EntropyDomainViolation);
}

TEST_CASE("divergence dominates the stated norm (modulus check)") {
  Rng rng(42);
  const auto ent = BregmanGeometry::Entropy();
  const auto euc = BregmanGeometry::Euclidean();
  const auto simplex = FeasibleSet::Simplex(5);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd x = simplex.sample(rng);
    const VectorXd u = simplex.sample(rng);
    const double d1 = geometry_norm(ent, u - x);
    CHECK(divergence(ent, x, u) >= 0.5 * ent.modulus * d1 * d1 - 1e-12);
    const double d2 = geometry_norm(euc, u - x);
    CHECK(divergence(euc, x, u) ==
          doctest::Approx(0.5 * d2 * d2).epsilon(1e-12));
  }
}

TEST_CASE("geometry norms") {
  const VectorXd v = vec({3.0, -4.0});
  CHECK(geometry_norm(BregmanGeometry::Euclidean(), v) ==
        doctest::Approx(5.0));
  CHECK(geometry_norm(BregmanGeometry::Entropy(), v) == doctest::Approx(7.0));
}

TEST_CASE("euclidean prox closed forms") {
  const auto geom = BregmanGeometry::Euclidean();
  const VectorXd l = vec({1.0, -2.0, 0.5});
  const VectorXd x = vec({0.2, 0.4, -0.1});
  const VectorXd xp = vec({1.0, 0.0, 0.0});

  SUBCASE("whole space") {
    const auto set = FeasibleSet::WholeSpace(3);
    const ProxSubproblem sub{l, x, xp, 2.0, 3.0, geom, set};
    const VectorXd u = solve_prox(sub);
    const VectorXd expect = (2.0 * x + 3.0 * xp - l) / 5.0;
    CHECK((u - expect).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(prox_optimality_residual(sub, u) <= tol_prox * 5.0);
  }

  SUBCASE("box clamps the unconstrained point") {
    const auto set = FeasibleSet::Box(vec({0.0, 0.0, 0.0}),
                                      vec({0.3, 0.3, 0.3}));
    const VectorXd xin = vec({0.2, 0.25, 0.05});
    const ProxSubproblem sub{l, xin, vec({0.1, 0.1, 0.1}), 1.0, 0.0, geom,
                             set};
    const VectorXd u = solve_prox(sub);
    CHECK(set.contains(u));
    CHECK(prox_optimality_residual(sub, u) <= tol_prox);
  }

  SUBCASE("grouped balls project radially") {
    const auto set = FeasibleSet::GroupedUnitBalls(2);
    const VectorXd big = vec({3.0, 4.0, 0.1, 0.0});
    const VectorXd anchor = vec({0.0, 0.0, 0.0, 0.0});
    // With beta=1, tau=0, anchor=0: u = clip bonus of -l onto each disk.
    const ProxSubproblem sub{big, anchor, anchor, 1.0, 0.0, geom, set};
    const VectorXd u = solve_prox(sub);
    // Unconstrained u = -l; group 1 norm 5 -> scaled to unit, group 2 inside.
    CHECK(u[0] == doctest::Approx(-0.6).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(u[2] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(u[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(prox_optimality_residual(sub, u) <= tol_prox);
  }
}

TEST_CASE("entropy prox on the simplex: frozen closed-form cases") {
  const auto geom = BregmanGeometry::Entropy();
  const auto set = FeasibleSet::Simplex(2);

  SUBCASE("two coordinates, one anchor") {
    const VectorXd l = vec({std::log(2.0), 0.0});
    const VectorXd x = vec({0.5, 0.5});
    const ProxSubproblem sub{l, x, x, 1.0, 0.0, geom, set};
    const VectorXd u = solve_prox(sub);
    CHECK(u[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }

  SUBCASE("three coordinates, two anchors") {
    const auto set3 = FeasibleSet::Simplex(3);
    const VectorXd l = vec({0.3, -0.1, 0.7});
    const VectorXd x = vec({0.2, 0.5, 0.3});
    const VectorXd xp = vec({0.6, 0.1, 0.3});
    const ProxSubproblem sub{l, x, xp, 2.0, 0.5, geom, set3};
    const VectorXd u = solve_prox(sub);
    CHECK(u[0] == doctest::Approx(0.26788249739884407).epsilon(1e-12));
    CHECK(u[1] == doctest::Approx(0.45724947242888186).epsilon(1e-12));
    CHECK(u[2] == doctest::Approx(0.27486803017227407).epsilon(1e-12));
  }
}

TEST_CASE("entropy prox agrees with brute-force grid search") {
  const auto geom = BregmanGeometry::Entropy();
  const auto set = FeasibleSet::Simplex(3);
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    VectorXd l(3);
    for (int i = 0; i < 3; ++i) l[i] = rng.uniform(-1.0, 1.0);
    const VectorXd x = set.sample(rng);
    const VectorXd xp = set.sample(rng);
    const double beta = rng.uniform(0.5, 3.0);
    const double tau = rng.uniform(0.0, 2.0);
    const ProxSubproblem sub{l, x, xp, beta, tau, geom, set};
    const VectorXd u = solve_prox(sub);
    const VectorXd brute = grid_min_simplex3(sub);
    CHECK((u - brute).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("entropy prox with a zero anchor coordinate keeps it zero") {
  const auto geom = BregmanGeometry::Entropy();
  const auto set = FeasibleSet::Simplex(3);
  const VectorXd l = vec({0.1, 0.2, 0.3});
  const VectorXd x = vec({0.0, 0.4, 0.6});
  const ProxSubproblem sub{l, x, x, 1.5, 0.5, geom, set};
  const VectorXd u = solve_prox(sub);
  CHECK(u[0] == 0.0);
  CHECK(u.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("halfspace prox activates the constraint only when needed") {
  const auto geom = BregmanGeometry::Entropy();
  const VectorXd b = vec({2.0, 1.0, 0.5});

  SUBCASE("inactive constraint reduces to the simplex prox") {
    const auto half = FeasibleSet::SimplexHalfspace(b, 0.6);
    const auto simp = FeasibleSet::Simplex(3);
    const VectorXd l = vec({0.3, -0.1, 0.7});
    const VectorXd x = vec({1.0 / 3, 1.0 / 3, 1.0 / 3});
    const ProxSubproblem sub_h{l, x, x, 1.0, 0.5, geom, half};
    const ProxSubproblem sub_s{l, x, x, 1.0, 0.5, geom, simp};
    const VectorXd uh = solve_prox(sub_h);
    const VectorXd us = solve_prox(sub_s);
    REQUIRE(b.dot(us) > 0.6);  // constraint indeed slack at the free optimum
    CHECK((uh - us).lpNorm<Eigen::Infinity>() <= 1e-10);
  }

  SUBCASE("active constraint lands on the boundary and stays optimal") {
    const auto half = FeasibleSet::SimplexHalfspace(b, 1.6);
    // Pull hard toward coordinate 3 (low b weight) so the floor binds.
    const VectorXd l = vec({2.0, 1.0, -2.0});
    const VectorXd x = vec({0.7, 0.2, 0.1});  // b'x = 1.65, feasible
    const ProxSubproblem sub{l, x, x, 1.0, 0.0, geom, half};
    const VectorXd u = solve_prox(sub);
    CHECK(half.contains(u));
    CHECK(b.dot(u) == doctest::Approx(1.6).epsilon(1e-7));
    CHECK(prox_optimality_residual(sub, u, 256) <= 1e-10);
  }

  SUBCASE("empty set is rejected at construction") {
    CHECK_THROWS_AS(FeasibleSet::SimplexHalfspace(vec({0.5, 0.4}), 0.9),
                    InvalidConstants);
  }
}

TEST_CASE("optimality residual is tiny at optima across set kinds") {
  Rng rng(2024);
  const auto euc = BregmanGeometry::Euclidean();
  const auto ent = BregmanGeometry::Entropy();

  auto run = [&](const BregmanGeometry& geom, const FeasibleSet& set,
                 int trials) {
    for (int trial = 0; trial < trials; ++trial) {
      VectorXd l(set.dim);
      for (int i = 0; i < set.dim; ++i) l[i] = rng.uniform(-2.0, 2.0);
      const VectorXd x = set.sample(rng);
      const VectorXd xp = set.sample(rng);
      const double beta = rng.uniform(0.2, 4.0);
      const double tau = rng.uniform(0.0, 2.0);
      const ProxSubproblem sub{l, x, xp, beta, tau, geom, set};
      const VectorXd u = solve_prox(sub);
      CHECK(set.contains(u));
      CHECK(prox_optimality_residual(sub, u, 128) <= 1e-10);
    }
  };

  run(euc, FeasibleSet::WholeSpace(4), 25);
  run(euc, FeasibleSet::Box(VectorXd::Constant(4, -1.0),
                            VectorXd::Constant(4, 1.0)),
      25);
  run(euc, FeasibleSet::GroupedUnitBalls(3), 25);
  run(ent, FeasibleSet::Simplex(5), 25);
  {
    Rng bgen(9);
    VectorXd b(5);
    for (int i = 0; i < 5; ++i) b[i] = bgen.uniform(0.0, 2.0);
    run(ent, FeasibleSet::SimplexHalfspace(b, 0.8 * b.maxCoeff()), 25);
  }
}

TEST_CASE("residual detects non-optima") {
  const auto geom = BregmanGeometry::Euclidean();
  const auto set = FeasibleSet::WholeSpace(2);
  const VectorXd l = vec({1.0, 1.0});
  const VectorXd x = vec({0.0, 0.0});
  const ProxSubproblem sub{l, x, x, 1.0, 0.0, geom, set};
  const VectorXd wrong = vec({0.5, 0.5});  // true optimum is (-1, -1)
  CHECK(prox_optimality_residual(sub, wrong) > 0.1);
}

TEST_CASE("samples are feasible for every set kind") {
  Rng rng(555);
  const auto sets = {
      FeasibleSet::WholeSpace(6),
      FeasibleSet::Box(VectorXd::Constant(4, -2.0), VectorXd::Constant(4, 5.0)),
      FeasibleSet::Simplex(7),
      FeasibleSet::GroupedUnitBalls(4),
  };
  for (const auto& set : sets) {
    for (int i = 0; i < 50; ++i) CHECK(set.contains(set.sample(rng)));
  }
  VectorXd b(4);
  b << 0.5, 1.5, 0.2, 1.0;
  const auto half = FeasibleSet::SimplexHalfspace(b, 1.2);
  for (int i = 0; i < 50; ++i) CHECK(half.contains(half.sample(rng)));
}
