#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ttrs/linalg.hpp"

namespace ttrs {

// phi(lambda) = sum_i w_i / (lambda_i + lambda)^2 restricted to the open
// interval (max{0, -lambda_2}, -lambda_1); w_i = (q_i^T a)^2.
struct SecularFunction {
  std::vector<std::pair<double, double>> coefficients;  // (lambda_i, w_i)
  double lo = 0.0;
  double hi = 0.0;

  double phi(double lam) const;
  double dphi(double lam) const;
  double ddphi(double lam) const;
};

enum class LngmReason {
  NoInterval,
  OrthogonalToCriticalEigenvector,
  NoRoot,
  RootFailsSlopeTest,
  Found,
};

const char* to_string(LngmReason r);

struct LngmConfig {
  double mult_tol = 1e-8;   // lambda_2 - lambda_1 <= mult_tol * (1 + |lambda_1|)
  double orth_tol = 1e-10;  // |q_1^T a| <= orth_tol * ||a||
  double root_tol = 1e-12;  // |phi - delta1^2| <= root_tol * delta1^2
  int max_iter = 100;
  // Debug assertion of the projected-Hessian condition at the returned point;
  // it holds automatically for the nonnegative-slope root on the interval.
  bool check_projected_hessian = false;
};

struct LngmResult {
  bool exists = false;
  std::optional<Vec> x;
  std::optional<double> lambda_star;
  LngmReason reason = LngmReason::NoRoot;
};

// Local non-global minimizer of min 1/2 x^T A x + a^T x s.t. ||x||^2 <= delta1^2.
LngmResult lngm(const SymMatrix& A, const Vec& a, double delta1,
                const LngmConfig& cfg = {});

// All roots of phi(lambda) = delta1_sq inside the open interval, ascending
// (0, 1, or 2 of them). Requires a nonempty interval and w_1 > 0.
std::vector<double> phi_roots(const SecularFunction& f, double delta1_sq,
                              const LngmConfig& cfg = {});

// LNGM of the ellipsoid form min 1/2 x^T A x + a^T x s.t.
// (x-c)^T B (x-c) <= delta^2, reduced to the ball by y = B^{1/2} (x - c)
// with B^{1/2} from the spectral decomposition.
LngmResult lngm_ellipsoid(const SymMatrix& A, const Vec& a, const SymMatrix& B,
                          const Vec& c, double delta,
                          const LngmConfig& cfg = {});

}  // namespace ttrs
