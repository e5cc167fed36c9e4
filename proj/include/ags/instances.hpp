#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "json.hpp"

#include "ags/saddle.hpp"

namespace ags {

// Markowitz-style risk minimization over the return-constrained simplex:
//   min_x  (1/2) x' (A'FA + D) x   s.t.  x in simplex, b'x >= eta
// split as f(x) = (1/2) x'Dx (constant L = lmax(D)) and
// h(x) = (1/2) x'A'FAx (constant M = lmax(A'FA)), paired with the entropy
// geometry.  The 1/2 makes the declared constants exact Lipschitz bounds.
struct PortfolioInstance {
  int n = 0;  // assets
  int m = 0;  // factor observations
  std::uint64_t seed = 0;
  double target_ratio = 1.0;  // M / L by construction
  double eta = 1.0;
  VectorXd b;   // expected returns, U[0,5]
  MatrixXd A;   // m x n loadings, U[0,1]
  MatrixXd F;   // m x m PSD factor covariance, B'B
  MatrixXd D;   // n x n PSD specific risk, scaled so lmax(D) = L
  double L = 0.0;
  double M = 0.0;
};

// Streams: "b", "A" (row-major), "B" (row-major normals), "C" (row-major
// normals); eta = 1; M estimated from A'FA, L = M / target_ratio, and
// D = L C'C / lmax(C'C) with B of size ceil(m/2) x m, C of size
// ceil(n/2) x n.
PortfolioInstance gen_portfolio(int n, int m, double target_ratio,
                                std::uint64_t seed);

SmoothOracle portfolio_f(const PortfolioInstance& inst);
SmoothOracle portfolio_h(const PortfolioInstance& inst);
FeasibleSet portfolio_set(const PortfolioInstance& inst);
// Uniform point, blended toward the best-return vertex if the return
// constraint cuts it off.
VectorXd portfolio_start(const PortfolioInstance& inst);

// Total-variation image recovery from random sign measurements:
//   min_x (1/2)||Ax - b||^2 + eta_tv ||Dx||_{2,1}
// where D stacks forward horizontal/vertical differences (zero at the
// boundary) in pairs per pixel, so ||Dx||_{2,1} sums per-pixel gradient
// magnitudes.  ||D||^2 <= 8, hence ||K|| = eta_tv sqrt(8) for K = eta_tv D.
struct TvInstance {
  int rows = 0, cols = 0;
  int n = 0;  // rows * cols
  int m = 0;  // ceil(n / 3)
  std::uint64_t seed = 0;
  double eta_tv = 0.0;
  double noise_var = 0.0;
  MatrixXd A;       // m x n, entries +-1/sqrt(m)
  VectorXd b;       // A x_true + N(0, noise_var)
  VectorXd x_true;  // concentric-rectangle phantom, values in [0,1]
  double L = 0.0;      // certified lmax(A'A)
  double K_norm = 0.0; // eta_tv * sqrt(8)
};

// Streams: "A" (row-major signs), "noise".
TvInstance gen_tv(int rows, int cols, double eta_tv, double noise_var,
                  std::uint64_t seed);

// Forward-difference operator (2n outputs: per pixel, horizontal then
// vertical, zero row at the right/bottom boundary).
LinearOperator tv_diff_operator(int rows, int cols);
// K = eta_tv * D with norm bound eta_tv * sqrt(8).
LinearOperator tv_k_operator(const TvInstance& inst);
// f(x) = (1/2)||Ax-b||^2 + (ridge/2)||x||^2 with L = lmax(A'A) + ridge and
// declared strong convexity = ridge.
SmoothOracle tv_f(const TvInstance& inst, double ridge = 0.0);
// Full saddle form: X = R^n, Y = per-pixel unit balls, euclidean W, y0 = 0,
// Omega = (#pixels)/2, J == 0.
SaddleInstance tv_saddle(const TvInstance& inst, double ridge = 0.0);
// The phantom alone (for tests and regeneration).
VectorXd tv_phantom(int rows, int cols);

// Largest eigenvalue of a symmetric PSD operator by power iteration.
// Returns an upper-biased bound: one extra Rayleigh-quotient refinement,
// then multiplied by (1 + tol).  `converged` reports whether successive
// Rayleigh quotients settled within tol before max_iters.
struct LmaxEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

LmaxEstimate estimate_lmax(const std::function<VectorXd(const VectorXd&)>& op,
                           int dim, double tol = 1e-10, int max_iters = 20000,
                           std::uint64_t seed = 8675309ull);

// JSON round trip.  Dense arrays with at most 10^4 entries are inlined as
// number lists; larger ones are base64 of little-endian doubles
// (row-major).  Round trips are bit exact.
nlohmann::json to_json(const PortfolioInstance& inst);
nlohmann::json to_json(const TvInstance& inst);
PortfolioInstance portfolio_from_json(const nlohmann::json& j);
TvInstance tv_from_json(const nlohmann::json& j);

using AnyInstance = std::variant<PortfolioInstance, TvInstance>;
AnyInstance load_instance(const std::string& path);  // throws IoError
void save_instance(const nlohmann::json& j, const std::string& path);

}  // namespace ags
