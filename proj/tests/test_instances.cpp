#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ags/errors.hpp"
#include "ags/instances.hpp"

using namespace ags;

TEST_CASE("power iteration matches a dense eigensolver") {
  Rng rng(17);
  const int n = 12;
  MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.normal();
  const MatrixXd S = B.transpose() * B;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
  const double exact = eig.eigenvalues().maxCoeff();

  const auto est = estimate_lmax(
      [&S](const VectorXd& v) -> VectorXd { return S * v; }, n);
  CHECK(est.converged);
  // Upper-biased by design, but within the advertised tolerance envelope.
  CHECK(est.value >= exact * (1.0 - 1e-9));
  CHECK(est.value <= exact * (1.0 + 1e-6));
}

TEST_CASE("portfolio generator shapes, constants and determinism") {
  const PortfolioInstance inst = gen_portfolio(15, 6, 64.0, 123);
  CHECK(inst.n == 15);
  CHECK(inst.m == 6);
  CHECK(inst.A.rows() == 6);
  CHECK(inst.A.cols() == 15);
  CHECK(inst.F.rows() == 6);
  CHECK(inst.D.rows() == 15);
  CHECK(inst.M == doctest::Approx(64.0 * inst.L).epsilon(1e-12));

  SUBCASE("declared constants match the dense spectra") {
    Eigen::SelfAdjointEigenSolver<MatrixXd> ed(inst.D);
    CHECK(ed.eigenvalues().maxCoeff() ==
          doctest::Approx(inst.L).epsilon(1e-6));
    const MatrixXd G = inst.A.transpose() * inst.F * inst.A;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eg(G);
    CHECK(eg.eigenvalues().maxCoeff() ==
          doctest::Approx(inst.M).epsilon(1e-6));
  }

  SUBCASE("same seed, same bits; different seed, different draw") {
    const PortfolioInstance again = gen_portfolio(15, 6, 64.0, 123);
    CHECK((inst.A - again.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.D - again.D).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.b - again.b).cwiseAbs().maxCoeff() == 0.0);
    const PortfolioInstance other = gen_portfolio(15, 6, 64.0, 124);
    CHECK((inst.A - other.A).cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("return entries live in the documented ranges") {
    CHECK(inst.b.minCoeff() >= 0.0);
    CHECK(inst.b.maxCoeff() <= 5.0);
    CHECK(inst.A.minCoeff() >= 0.0);
    CHECK(inst.A.maxCoeff() <= 1.0);
  }

  SUBCASE("rejects bad arguments") {
    CHECK_THROWS_AS(gen_portfolio(1, 4, 4.0, 1), InvalidConstants);
    CHECK_THROWS_AS(gen_portfolio(5, 0, 4.0, 1), InvalidConstants);
    CHECK_THROWS_AS(gen_portfolio(5, 4, 0.5, 1), InvalidConstants);
  }
}

TEST_CASE("portfolio oracles evaluate the documented quadratics") {
  const PortfolioInstance inst = gen_portfolio(8, 4, 16.0, 5);
  const SmoothOracle f = portfolio_f(inst);
  const SmoothOracle h = portfolio_h(inst);
  Rng rng(2);
  const auto set = portfolio_set(inst);
  const VectorXd x = set.sample(rng);

  CHECK(f.value(x) == doctest::Approx(0.5 * x.dot(inst.D * x)).epsilon(1e-12));
  const MatrixXd G = inst.A.transpose() * inst.F * inst.A;
  CHECK(h.value(x) == doctest::Approx(0.5 * x.dot(G * x)).epsilon(1e-12));
  CHECK((f.gradient(x) - inst.D * x).norm() <= 1e-12);
  CHECK((h.gradient(x) - G * x).norm() <= 1e-12);
  CHECK(f.lipschitz == inst.L);
  CHECK(h.lipschitz == inst.M);

  SUBCASE("declared constants survive an l1 smoothness audit") {
    const auto repf = check_smoothness(f, set, 80, 999, NormKind::l1);
    CHECK(repf.max_violation_upper <= 1e-8);
    const auto reph = check_smoothness(h, set, 80, 999, NormKind::l1);
    CHECK(reph.max_violation_upper <= 1e-8);
  }

  SUBCASE("start point is feasible") {
    CHECK(set.contains(portfolio_start(inst)));
  }
}

TEST_CASE("portfolio start handles a binding return constraint") {
  // Push eta close to max b so the uniform point is infeasible.
  PortfolioInstance inst = gen_portfolio(10, 4, 4.0, 31);
  inst.eta = 0.95 * inst.b.maxCoeff();
  const auto set = portfolio_set(inst);
  const VectorXd x0 = portfolio_start(inst);
  CHECK(set.contains(x0));
  CHECK(inst.b.dot(x0) >= inst.eta);
}

TEST_CASE("difference operator: adjoint identity and norm bound") {
  const int rows = 6, cols = 5, n = rows * cols;
  const LinearOperator D = tv_diff_operator(rows, cols);
  CHECK(D.rows == 2 * n);
  CHECK(D.cols == n);

  SUBCASE("adjoint identity <Dx, y> = <x, D'y>") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd x(n), y(2 * n);
      for (int i = 0; i < n; ++i) x[i] = rng.normal();
      for (int i = 0; i < 2 * n; ++i) y[i] = rng.normal();
      const double lhs = D.apply(x).dot(y);
      const double rhs = x.dot(D.apply_adjoint(y));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }

  SUBCASE("squared norm is at most 8 and the bound is tight-ish") {
    const auto est = estimate_lmax(
        [&D](const VectorXd& v) -> VectorXd {
          return D.apply_adjoint(D.apply(v));
        },
        n);
    CHECK(est.value <= 8.0 + 1e-9);
    CHECK(est.value >= 4.0);  // sanity: not trivially small
    CHECK(D.norm_bound == doctest::Approx(std::sqrt(8.0)));
  }

  SUBCASE("boundary rows are zero") {
    VectorXd x = VectorXd::Zero(n);
    x[n - 1] = 1.0;  // bottom-right pixel
    const VectorXd dx = D.apply(x);
    // Its own forward differences sit at out[2i], out[2i+1] and must be 0.
    CHECK(dx[2 * (n - 1)] == 0.0);
    CHECK(dx[2 * (n - 1) + 1] == 0.0);
  }
}

TEST_CASE("tv generator shapes, phantom and constants") {
  const TvInstance inst = gen_tv(8, 8, 1.5, 0.001, 77);
  CHECK(inst.n == 64);
  CHECK(inst.m == 22);  // ceil(64/3)
  CHECK(inst.A.rows() == 22);
  CHECK(inst.A.cols() == 64);
  CHECK(inst.K_norm == doctest::Approx(1.5 * std::sqrt(8.0)));

  SUBCASE("phantom values sit in [0,1] with interior structure") {
    const VectorXd ph = tv_phantom(8, 8);
    CHECK(ph.minCoeff() >= 0.0);
    CHECK(ph.maxCoeff() <= 1.0);
    CHECK(ph.maxCoeff() > 0.0);
    CHECK((inst.x_true - ph).norm() == 0.0);
  }

  SUBCASE("measurement entries are +-1/sqrt(m)") {
    const double s = 1.0 / std::sqrt(22.0);
    for (int i = 0; i < inst.A.rows(); ++i)
      for (int j = 0; j < inst.A.cols(); ++j)
        CHECK(std::abs(inst.A(i, j)) == doctest::Approx(s).epsilon(1e-15));
  }

  SUBCASE("L certifies lmax(A'A)") {
    const MatrixXd G = inst.A.transpose() * inst.A;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G);
    CHECK(inst.L >= eig.eigenvalues().maxCoeff() * (1.0 - 1e-9));
    CHECK(inst.L <= eig.eigenvalues().maxCoeff() * (1.0 + 1e-6));
  }

  SUBCASE("determinism") {
    const TvInstance again = gen_tv(8, 8, 1.5, 0.001, 77);
    CHECK((inst.A - again.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((inst.b - again.b).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("rejects bad arguments") {
    CHECK_THROWS_AS(gen_tv(1, 8, 1.0, 0.0, 1), InvalidConstants);
    CHECK_THROWS_AS(gen_tv(8, 8, 0.0, 0.0, 1), InvalidConstants);
    CHECK_THROWS_AS(gen_tv(8, 8, 1.0, -0.1, 1), InvalidConstants);
  }
}

TEST_CASE("tv data fit oracle with and without ridge") {
  const TvInstance inst = gen_tv(5, 4, 1.0, 0.01, 9);
  Rng rng(8);
  VectorXd x(inst.n);
  for (int i = 0; i < inst.n; ++i) x[i] = rng.normal();

  SUBCASE("plain least squares") {
    const SmoothOracle f = tv_f(inst);
    const double expect = 0.5 * (inst.A * x - inst.b).squaredNorm();
    CHECK(f.value(x) == doctest::Approx(expect).epsilon(1e-12));
    const VectorXd g = inst.A.transpose() * (inst.A * x - inst.b);
    CHECK((f.gradient(x) - g).norm() <= 1e-12);
    CHECK(f.lipschitz == inst.L);
    CHECK(f.strong_convexity == 0.0);
  }

  SUBCASE("ridge shifts both declared constants") {
    const SmoothOracle f = tv_f(inst, 0.7);
    const double expect =
        0.5 * (inst.A * x - inst.b).squaredNorm() + 0.35 * x.squaredNorm();
    CHECK(f.value(x) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(f.lipschitz == doctest::Approx(inst.L + 0.7));
    CHECK(f.strong_convexity == doctest::Approx(0.7));
  }
}

TEST_CASE("tv saddle assembly") {
  const TvInstance inst = gen_tv(4, 4, 2.0, 0.001, 21);
  const SaddleInstance sad = tv_saddle(inst, 0.3);
  CHECK(sad.X.kind == FeasibleSet::Kind::whole_space);
  CHECK(sad.Y.kind == FeasibleSet::Kind::grouped_unit_balls);
  CHECK(sad.Y.dim == 2 * inst.n);
  CHECK(sad.Omega == doctest::Approx(inst.n / 2.0));
  CHECK(sad.y0.norm() == 0.0);
  CHECK(sad.K.norm_bound == doctest::Approx(inst.K_norm));
  CHECK(sad.f.strong_convexity == doctest::Approx(0.3));
  CHECK(sad.Jdiag.size() == 0);

  // psi_exact = fit + eta_tv * sum of per-pixel gradient magnitudes.
  Rng rng(3);
  VectorXd x(inst.n);
  for (int i = 0; i < inst.n; ++i) x[i] = rng.uniform(0.0, 1.0);
  const LinearOperator D = tv_diff_operator(4, 4);
  const VectorXd dx = D.apply(x);
  double tvsum = 0.0;
  for (int g = 0; g < inst.n; ++g)
    tvsum += std::hypot(dx[2 * g], dx[2 * g + 1]);
  const double expect = sad.f.value(x) + 2.0 * tvsum;
  CHECK(psi_exact(sad, x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("json round trips are bit exact") {
  SUBCASE("portfolio (small: inline arrays)") {
    const PortfolioInstance inst = gen_portfolio(9, 4, 8.0, 1001);
    const PortfolioInstance back = portfolio_from_json(to_json(inst));
    CHECK(back.n == inst.n);
    CHECK(back.seed == inst.seed);
    CHECK((back.A - inst.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.F - inst.F).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.D - inst.D).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b - inst.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.L == inst.L);
    CHECK(back.M == inst.M);
  }

  SUBCASE("large matrices take the base64 path and still round trip") {
    const PortfolioInstance inst = gen_portfolio(120, 90, 4.0, 2002);
    const nlohmann::json j = to_json(inst);
    // 90 x 120 = 10800 > 10^4 entries: stored packed, not inline.
    REQUIRE(j.at("A").contains("b64"));
    const PortfolioInstance back = portfolio_from_json(j);
    CHECK((back.A - inst.A).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("tv instance") {
    const TvInstance inst = gen_tv(6, 7, 1.25, 0.002, 3003);
    const TvInstance back = tv_from_json(to_json(inst));
    CHECK(back.rows == inst.rows);
    CHECK(back.cols == inst.cols);
    CHECK(back.eta_tv == inst.eta_tv);
    CHECK((back.A - inst.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.b - inst.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.x_true - inst.x_true).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.L == inst.L);
    CHECK(back.K_norm == inst.K_norm);
  }

  SUBCASE("file save/load dispatches on the type tag") {
    const std::string path = "instances_roundtrip_test.json";
    save_instance(to_json(gen_tv(4, 4, 1.0, 0.001, 5)), path);
    const AnyInstance any = load_instance(path);
    REQUIRE(std::holds_alternative<TvInstance>(any));
    CHECK(std::get<TvInstance>(any).rows == 4);
    std::remove(path.c_str());
  }

  SUBCASE("unknown type tag is rejected") {
    const std::string path = "instances_badtag_test.json";
    {
      std::ofstream out(path);
      out << R"({"schema_version":1,"type":"mystery"})";
    }
    CHECK_THROWS_AS(load_instance(path), IoError);
    std::remove(path.c_str());
  }
}
