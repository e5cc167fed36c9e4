#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ags {

// Step-size schedule for the two-loop sliding solver.
//
// Outer iteration k = 1,2,... carries (gamma_k, beta_k, lambda_k, T_k);
// inner iteration t = 1..T_k of outer k carries (alpha_{k,t}, p_{k,t},
// q_{k,t}).  The derived product
//   Lambda_1 = 1,  Lambda_t = (1 - alpha_t) Lambda_{t-1}
// appears in the validity conditions; closed forms are supplied for the
// built-in schedules so long horizons do not accumulate rounding.
struct AgsSchedule {
  std::string name = "custom";
  double L = 0.0;   // gradient Lipschitz constant of the outer-loop part
  double M = 0.0;   // gradient Lipschitz constant of the inner-loop part
  double nu = 1.0;  // geometry modulus the constants were scaled with

  std::function<double(int)> gamma;       // k >= 1
  std::function<double(int)> beta;        // k >= 1
  std::function<double(int)> lambda;      // k >= 1
  std::function<int(int)> inner_steps;    // T_k, k >= 1
  std::function<double(int, int)> alpha;  // (k, t), t >= 1
  std::function<double(int, int)> p;      // (k, t)
  std::function<double(int, int)> q;      // (k, t)

  // Optional closed form for Lambda; when absent the recursion is used.
  std::function<double(int, int)> lambda_big;

  double biglambda(int k, int t) const;
};

// One failed condition: which (k, t) and the two sides that disagreed.
struct ScheduleViolation {
  int k = 0;
  int t = 0;
  std::string condition;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Checks, for every outer index k <= N (identities to 1e-9, inequalities
// with 1e-12 relative slack):
//   gamma_1 = 1                    beta_k >= L gamma_k / nu
//   lambda_k <= 1                  Lambda_{T_k}(1 - alpha_1) = 1 - gamma_k/lambda_k
//   beta_k p_t + q_t >= lambda_k M alpha_t / nu           for t <= T_k
//   alpha_t q_t / Lambda_t   constant in t                for t <  T_k
//   alpha_t (1+p_t)/Lambda_t = alpha_{t+1} p_{t+1}/Lambda_{t+1}
//   alpha_T (1+p_T) = Lambda_T alpha_1 p_1 + 1 - Lambda_T (1 - alpha_1)
//   Lambda recursion consistent with any supplied closed form
// Returns the list of violations (empty means the schedule is admissible).
std::vector<ScheduleViolation> validate_schedule(const AgsSchedule& sched,
                                                 double L, double M, double nu,
                                                 int N);

// Same checks restricted to a single outer index (used by the solver to
// validate lazily, proportionally to the work actually performed).
std::vector<ScheduleViolation> validate_schedule_at(const AgsSchedule& sched,
                                                    double L, double M,
                                                    double nu, int k);

// Schedule with every inner horizon T = ceil(sqrt(M/L)):
//   gamma_k = 2/(k+1),   lambda_1 = 1,
//   lambda_k = gamma_k (T+1)(T+2) / (T(T+3))  (k > 1),
//   beta_k = 3 L gamma_k / (nu k lambda_k),
//   k = 1 inner: alpha_t = 2/(t+1), p_t = (t-1)/2, q_t = 6M/(nu t)
//   k > 1 inner: alpha_t = 2/(t+2), p_t = t/2,     q_t = 6M/(nu k (t+1))
// Gap certificate: 30 L V(x0, x*) / (nu k (k+1)).
AgsSchedule schedule_cor1(double L, double M, double nu);

// Schedule with geometric inner iterations after the first outer step:
//   p = sqrt(M/L), alpha = 1/(p+1),
//   T_1 = ceil(sqrt(8M/(7L))), T_k = ceil(ln 3 / -ln(1-alpha)) (k > 1),
//   lambda_1 = 1, lambda_k = gamma_k / (1 - (1-alpha)^{T_k}),
//   beta_1 = L/nu, beta_k = 9 L gamma_k / (2 nu k lambda_k),
//   k = 1 inner: alpha_t = 2/(t+1), p_t = (t-1)/2, q_t = 7 L T_1(T_1+1)/(4 nu t)
//   k > 1 inner: alpha, p constant, q = 0
// Gap certificate: 9 L V(x0, x*) / (nu k (k+1)).
AgsSchedule schedule_cor2(double L, double M, double nu);

// Total inner iterations sum_{k<=N} T_k (equals the h-gradient count).
long long total_inner_steps(const AgsSchedule& sched, int N);

}  // namespace ags
