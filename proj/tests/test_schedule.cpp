#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ags/errors.hpp"
#include "ags/schedule.hpp"

using namespace ags;

TEST_CASE("inner-horizon constants for small smoothness ratios") {
  SUBCASE("sqrt horizon schedule") {
    const AgsSchedule s = schedule_cor1(1.0, 4.0, 1.0);
    CHECK(s.inner_steps(1) == 2);  // ceil(sqrt(4)) = 2
    CHECK(s.inner_steps(5) == 2);
    CHECK(s.gamma(1) == doctest::Approx(1.0));
    CHECK(s.gamma(3) == doctest::Approx(0.5));
    CHECK(s.lambda(1) == doctest::Approx(1.0));
    // lambda_k = gamma_k (T+1)(T+2)/(T(T+3)) with T = 2: factor 12/10.
    CHECK(s.lambda(2) == doctest::Approx((2.0 / 3.0) * 1.2).epsilon(1e-15));
    // beta_k = 3 L gamma_k / (nu k lambda_k).
    CHECK(s.beta(2) ==
          doctest::Approx(3.0 * (2.0 / 3.0) / (2.0 * 0.8)).epsilon(1e-15));
    // k = 1 inner: alpha_t = 2/(t+1), p_t = (t-1)/2, q_t = 6M/(nu t).
    CHECK(s.alpha(1, 1) == doctest::Approx(1.0));
    CHECK(s.alpha(1, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(s.p(1, 2) == doctest::Approx(0.5));
    CHECK(s.q(1, 2) == doctest::Approx(12.0));
    // k > 1 inner: alpha_t = 2/(t+2), p_t = t/2, q_t = 6M/(nu k (t+1)).
    CHECK(s.alpha(3, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(s.p(3, 2) == doctest::Approx(1.0));
    CHECK(s.q(3, 2) == doctest::Approx(24.0 / (3.0 * 3.0)).epsilon(1e-15));
  }

  SUBCASE("geometric horizon schedule") {
    const AgsSchedule s = schedule_cor2(1.0, 4.0, 1.0);
    // p = 2, alpha = 1/3, T1 = ceil(sqrt(32/7)) = ceil(2.138) = 3,
    // Tk = ceil(ln 3 / -ln(2/3)) = ceil(2.709) = 3.
    CHECK(s.inner_steps(1) == 3);
    CHECK(s.inner_steps(2) == 3);
    CHECK(s.alpha(2, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(s.p(2, 1) == doctest::Approx(2.0));
    CHECK(s.q(2, 1) == 0.0);
    CHECK(s.beta(1) == doctest::Approx(1.0));
    // lambda_2 = gamma_2 / (1 - (2/3)^3) = (2/3)/(19/27) = 18/19.
    CHECK(s.lambda(2) == doctest::Approx(18.0 / 19.0).epsilon(1e-15));
    // k = 1 inner: q_t = 7 L T1 (T1+1) / (4 nu t) = 21/t.
    CHECK(s.q(1, 1) == doctest::Approx(21.0));
    CHECK(s.q(1, 3) == doctest::Approx(7.0));
    // Lambda closed form: (1-alpha)^{t-1} for k > 1.
    CHECK(s.biglambda(2, 3) == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  }
}

TEST_CASE("equal constants collapse the inner horizon to one step") {
  const AgsSchedule s1 = schedule_cor1(2.0, 2.0, 1.0);
  CHECK(s1.inner_steps(1) == 1);
  const AgsSchedule s2 = schedule_cor2(2.0, 2.0, 1.0);
  CHECK(s2.inner_steps(1) == 2);  // ceil(sqrt(8/7)) = 2
}

TEST_CASE("constructors reject invalid constants") {
  CHECK_THROWS_AS(schedule_cor1(4.0, 1.0, 1.0), InvalidConstants);  // M < L
  CHECK_THROWS_AS(schedule_cor1(0.0, 1.0, 1.0), InvalidConstants);
  CHECK_THROWS_AS(schedule_cor2(-1.0, 1.0, 1.0), InvalidConstants);
  CHECK_THROWS_AS(schedule_cor2(1.0, 4.0, 0.0), InvalidConstants);
}

TEST_CASE("both built-in schedules validate over wide constant ranges") {
  for (double ratio : {1.0, 4.0, 64.0, 1024.0, 32768.0}) {
    for (double L : {0.5, 3.0}) {
      const double M = ratio * L;
      const auto v1 = validate_schedule(schedule_cor1(L, M, 1.0), L, M, 1.0,
                                        60);
      CHECK_MESSAGE(v1.empty(), "cor1 ratio ", ratio, " first: ",
                    v1.empty() ? "" : v1.front().condition);
      const auto v2 = validate_schedule(schedule_cor2(L, M, 1.0), L, M, 1.0,
                                        60);
      CHECK_MESSAGE(v2.empty(), "cor2 ratio ", ratio, " first: ",
                    v2.empty() ? "" : v2.front().condition);
    }
  }
}

TEST_CASE("validator flags each broken condition") {
  const double L = 1.0, M = 4.0, nu = 1.0;

  SUBCASE("gamma_1 must be 1") {
    AgsSchedule s = schedule_cor1(L, M, nu);
    s.gamma = [](int k) { return 1.0 / (k + 1); };
    const auto v = validate_schedule_at(s, L, M, nu, 1);
    REQUIRE(!v.empty());
    bool found = false;
    for (const auto& viol : v) found |= viol.condition.find("gamma") == 0;
    CHECK(found);
  }

  SUBCASE("beta floor") {
    AgsSchedule s = schedule_cor1(L, M, nu);
    s.beta = [](int) { return 1e-6; };
    const auto v = validate_schedule_at(s, L, M, nu, 1);
    REQUIRE(!v.empty());
  }

  SUBCASE("prox weight floor (q too small)") {
    AgsSchedule s = schedule_cor1(L, M, nu);
    s.q = [](int, int) { return 0.0; };
    const auto v = validate_schedule_at(s, L, M, nu, 2);
    REQUIRE(!v.empty());
  }

  SUBCASE("lambda above one") {
    AgsSchedule s = schedule_cor1(L, M, nu);
    s.lambda = [](int) { return 1.5; };
    const auto v = validate_schedule_at(s, L, M, nu, 2);
    REQUIRE(!v.empty());
  }

  SUBCASE("coupling between lambda, gamma and the Lambda product") {
    AgsSchedule s = schedule_cor2(L, M, nu);
    s.inner_steps = [](int) { return 1; };  // breaks the telescoping product
    const auto v = validate_schedule_at(s, L, M, nu, 2);
    REQUIRE(!v.empty());
  }

  SUBCASE("violation carries the offending indices and both sides") {
    AgsSchedule s = schedule_cor1(L, M, nu);
    s.beta = [](int) { return 1e-6; };
    const auto v = validate_schedule_at(s, L, M, nu, 3);
    REQUIRE(!v.empty());
    CHECK(v.front().k == 3);
    CHECK(v.front().lhs != v.front().rhs);
  }
}

TEST_CASE("total inner steps matches the horizon sum") {
  const AgsSchedule s = schedule_cor2(1.0, 64.0, 1.0);
  // T1 = ceil(sqrt(8*64/7)) = ceil(8.55) = 9; alpha = 1/9,
  // Tk = ceil(ln 3 / -ln(8/9)) = 10.
  CHECK(s.inner_steps(1) == 9);
  CHECK(s.inner_steps(2) == 10);
  CHECK(total_inner_steps(s, 5) == 9 + 4 * 10);

  const AgsSchedule c1 = schedule_cor1(1.0, 64.0, 1.0);
  CHECK(total_inner_steps(c1, 5) == 5 * 8);  // T = ceil(sqrt(64)) = 8
}

TEST_CASE("Lambda closed forms agree with the recursion") {
  for (const AgsSchedule& s :
       {schedule_cor1(1.0, 16.0, 1.0), schedule_cor2(1.0, 16.0, 1.0)}) {
    for (int k : {1, 2, 7}) {
      double prod = 1.0;
      for (int t = 1; t <= s.inner_steps(k); ++t) {
        if (t > 1) prod *= 1.0 - s.alpha(k, t);
        CHECK(s.biglambda(k, t) == doctest::Approx(prod).epsilon(1e-12));
      }
    }
  }
}
