#include "ags/schedule.hpp"

#include <cmath>

#include "ags/errors.hpp"

namespace ags {

namespace {

// |lhs - rhs| <= tol * max(1, |lhs|, |rhs|)
bool close(double lhs, double rhs, double tol = 1e-9) {
  return std::abs(lhs - rhs) <=
         tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// lhs >= rhs up to a relative slack.
bool at_least(double lhs, double rhs, double tol = 1e-12) {
  return lhs >= rhs - tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidConstants(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double AgsSchedule::biglambda(int k, int t) const {
  if (lambda_big) return lambda_big(k, t);
  double prod = 1.0;
  for (int i = 2; i <= t; ++i) prod *= 1.0 - alpha(k, i);
  return prod;
}

std::vector<ScheduleViolation> validate_schedule_at(const AgsSchedule& sched,
                                                    double L, double M,
                                                    double nu, int k) {
  std::vector<ScheduleViolation> out;
  auto flag = [&](int kk, int tt, const char* cond, double lhs, double rhs) {
    out.push_back({kk, tt, cond, lhs, rhs});
  };

  const double gamma_k = sched.gamma(k);
  const double beta_k = sched.beta(k);
  const double lambda_k = sched.lambda(k);
  const int T = sched.inner_steps(k);

  if (k == 1 && !close(gamma_k, 1.0)) flag(k, 0, "gamma_1 = 1", gamma_k, 1.0);
  if (!(lambda_k <= 1.0 + 1e-12)) flag(k, 0, "lambda_k <= 1", lambda_k, 1.0);
  if (!at_least(beta_k, L * gamma_k / nu)) {
    flag(k, 0, "beta_k >= L gamma_k / nu", beta_k, L * gamma_k / nu);
  }
  if (T < 1) flag(k, 0, "T_k >= 1", static_cast<double>(T), 1.0);

  // Lambda recursion vs any closed form.
  double lambda_prod = 1.0;
  if (!close(sched.biglambda(k, 1), 1.0)) {
    flag(k, 1, "Lambda_1 = 1", sched.biglambda(k, 1), 1.0);
  }
  for (int t = 2; t <= T; ++t) {
    lambda_prod *= 1.0 - sched.alpha(k, t);
    if (!close(sched.biglambda(k, t), lambda_prod)) {
      flag(k, t, "Lambda_t = (1-alpha_t) Lambda_{t-1}", sched.biglambda(k, t),
           lambda_prod);
    }
  }

  const double alpha_1 = sched.alpha(k, 1);
  const double lambda_T = sched.biglambda(k, T);

  // Coupling between the inner horizon and the outer mixing weights.
  {
    const double lhs = lambda_T * (1.0 - alpha_1);
    const double rhs = 1.0 - gamma_k / lambda_k;
    if (!close(lhs, rhs)) {
      flag(k, T, "Lambda_T (1-alpha_1) = 1 - gamma_k/lambda_k", lhs, rhs);
    }
  }

  // Per-step curvature condition and the two telescoping identities.
  for (int t = 1; t <= T; ++t) {
    const double a_t = sched.alpha(k, t);
    const double p_t = sched.p(k, t);
    const double q_t = sched.q(k, t);
    const double lam_t = sched.biglambda(k, t);
    if (!at_least(beta_k * p_t + q_t, lambda_k * M * a_t / nu)) {
      flag(k, t, "beta p_t + q_t >= lambda M alpha_t / nu",
           beta_k * p_t + q_t, lambda_k * M * a_t / nu);
    }
    if (t < T) {
      const double a_n = sched.alpha(k, t + 1);
      const double p_n = sched.p(k, t + 1);
      const double q_n = sched.q(k, t + 1);
      const double lam_n = sched.biglambda(k, t + 1);
      if (!close(a_t * q_t / lam_t, a_n * q_n / lam_n)) {
        flag(k, t, "alpha q / Lambda constant in t", a_t * q_t / lam_t,
             a_n * q_n / lam_n);
      }
      if (!close(a_t * (1.0 + p_t) / lam_t, a_n * p_n / lam_n)) {
        flag(k, t, "alpha (1+p) / Lambda telescopes",
             a_t * (1.0 + p_t) / lam_t, a_n * p_n / lam_n);
      }
    }
  }

  // Endpoint identity tying the last inner step back to the first.
  {
    const double lhs = sched.alpha(k, T) * (1.0 + sched.p(k, T));
    const double rhs = lambda_T * alpha_1 * sched.p(k, 1) + 1.0 -
                       lambda_T * (1.0 - alpha_1);
    if (!close(lhs, rhs)) {
      flag(k, T, "alpha_T (1+p_T) endpoint identity", lhs, rhs);
    }
  }

  return out;
}

std::vector<ScheduleViolation> validate_schedule(const AgsSchedule& sched,
                                                 double L, double M, double nu,
                                                 int N) {
  std::vector<ScheduleViolation> out;
  for (int k = 1; k <= N; ++k) {
    auto v = validate_schedule_at(sched, L, M, nu, k);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

AgsSchedule schedule_cor1(double L, double M, double nu) {
  require_positive(L, "L");
  require_positive(nu, "nu");
  if (!(M >= L)) {
    throw InvalidConstants(
        "schedule_cor1: needs M >= L (swap the roles of the two parts "
        "otherwise)");
  }
  const int T = static_cast<int>(std::ceil(std::sqrt(M / L)));

  AgsSchedule s;
  s.name = "cor1";
  s.L = L;
  s.M = M;
  s.nu = nu;
  s.gamma = [](int k) { return 2.0 / (k + 1); };
  s.inner_steps = [T](int) { return T; };
  s.lambda = [T](int k) {
    if (k == 1) return 1.0;
    const double gamma_k = 2.0 / (k + 1);
    return gamma_k * (T + 1.0) * (T + 2.0) / (T * (T + 3.0));
  };
  s.beta = [L, nu, lam = s.lambda](int k) {
    const double gamma_k = 2.0 / (k + 1);
    return 3.0 * L * gamma_k / (nu * k * lam(k));
  };
  s.alpha = [](int k, int t) {
    return k == 1 ? 2.0 / (t + 1) : 2.0 / (t + 2);
  };
  s.p = [](int k, int t) { return k == 1 ? (t - 1.0) / 2.0 : t / 2.0; };
  s.q = [M, nu](int k, int t) {
    return k == 1 ? 6.0 * M / (nu * t) : 6.0 * M / (nu * k * (t + 1.0));
  };
  s.lambda_big = [](int k, int t) {
    return k == 1 ? 2.0 / (t * (t + 1.0)) : 6.0 / ((t + 1.0) * (t + 2.0));
  };
  return s;
}

AgsSchedule schedule_cor2(double L, double M, double nu) {
  require_positive(L, "L");
  require_positive(nu, "nu");
  if (!(M >= L)) {
    throw InvalidConstants(
        "schedule_cor2: needs M >= L (swap the roles of the two parts "
        "otherwise)");
  }
  const double p = std::sqrt(M / L);
  const double alpha = 1.0 / (p + 1.0);
  const int T1 = static_cast<int>(std::ceil(std::sqrt(8.0 * M / (7.0 * L))));
  const int Tk =
      static_cast<int>(std::ceil(std::log(3.0) / -std::log1p(-alpha)));

  AgsSchedule s;
  s.name = "cor2";
  s.L = L;
  s.M = M;
  s.nu = nu;
  s.gamma = [](int k) { return 2.0 / (k + 1); };
  s.inner_steps = [T1, Tk](int k) { return k == 1 ? T1 : Tk; };
  s.lambda = [alpha, Tk](int k) {
    if (k == 1) return 1.0;
    const double gamma_k = 2.0 / (k + 1);
    return gamma_k / (1.0 - std::pow(1.0 - alpha, Tk));
  };
  s.beta = [L, nu, lam = s.lambda](int k) {
    if (k == 1) return L / nu;
    const double gamma_k = 2.0 / (k + 1);
    return 9.0 * L * gamma_k / (2.0 * nu * k * lam(k));
  };
  s.alpha = [alpha](int k, int t) {
    return k == 1 ? 2.0 / (t + 1) : alpha;
  };
  s.p = [p](int k, int t) { return k == 1 ? (t - 1.0) / 2.0 : p; };
  s.q = [L, nu, T1](int k, int t) {
    return k == 1 ? 7.0 * L * T1 * (T1 + 1.0) / (4.0 * nu * t) : 0.0;
  };
  s.lambda_big = [alpha](int k, int t) {
    return k == 1 ? 2.0 / (t * (t + 1.0)) : std::pow(1.0 - alpha, t - 1);
  };
  return s;
}

long long total_inner_steps(const AgsSchedule& sched, int N) {
  long long total = 0;
  for (int k = 1; k <= N; ++k) total += sched.inner_steps(k);
  return total;
}

}  // namespace ags
