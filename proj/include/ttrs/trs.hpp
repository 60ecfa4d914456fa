#pragma once

#include <optional>
#include <utility>

#include "ttrs/linalg.hpp"

namespace ttrs {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleReduction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double kkt_tol = 1e-7;
  // Boundary-root convergence: |(x-c)^T B (x-c) - delta^2| <= secular_tol * delta^2.
  double secular_tol = 1e-10;
  int max_secular_iter = 200;
  // Hard case when the critical-eigenspace projection of the reduced linear
  // term is <= hard_case_tol * (1 + ||a||).
  double hard_case_tol = 1e-8;
};

// min 1/2 x^T A x + a^T x  s.t.  (x-c)^T B (x-c) <= delta^2.
struct TrsProblem {
  SymMatrix A;
  Vec a;
  SymMatrix B;
  Vec c;
  double delta;

  TrsProblem(SymMatrix A_, Vec a_, SymMatrix B_, Vec c_, double delta_);
  // Unit-ball form: B = I, c = 0.
  static TrsProblem ball(SymMatrix A_, Vec a_, double delta_);

  Eigen::Index n() const { return A.n(); }
  double objective(const Vec& x) const;
  double constraint_value(const Vec& x) const;  // (x-c)^T B (x-c)
};

struct TrsSolution {
  Vec x;
  double mu = 0.0;
  bool hard_case = false;
  std::optional<Vec> q;  // minimum-B-norm solution point (hard case)
  std::optional<Mat> V;  // B-orthonormal nullspace basis (hard case)
  double objective = 0.0;
};

// Shares the Cholesky factor of B and the reduced spectral decomposition
// across solves with fixed (A, B) and varying (a, c, delta), the shape of
// every subproblem sequence in the hybrid loop.
class TrsEngine {
 public:
  TrsEngine(const SymMatrix& A, const SymMatrix& B);

  Eigen::Index n() const { return n_; }
  // Smallest eigenvalue of the reduced Hessian; A + mu B is positive
  // semidefinite exactly for mu >= -theta_min.
  double theta_min() const { return sd_.eigenvalues(0); }
  double mu_bar() const { return theta_min() < 0 ? -theta_min() : 0.0; }

  TrsSolution solve(const Vec& a, const Vec& c, double delta,
                    const SolverConfig& cfg = {}) const;
  bool is_hard_case(const Vec& a, const Vec& c, double delta,
                    const SolverConfig& cfg = {}) const;

 private:
  Eigen::Index n_;
  Mat L_;             // B = L L^T
  SpectralDecomp sd_; // of L^{-1} A L^{-T}
  Mat back_;          // L^{-T} U: maps reduced coordinates to x - c
};

TrsSolution solve_trs(const TrsProblem& p, const SolverConfig& cfg = {});

bool detect_hard_case(const TrsProblem& p, const SolverConfig& cfg = {});

// Theorem-style minimum-norm solution of the singular stationarity system at
// the pencil-threshold multiplier, plus the B-orthonormal nullspace basis.
std::pair<Vec, Mat> hard_case_solution(const TrsProblem& p, double mu_star,
                                       double sigma);
std::pair<Vec, Mat> hard_case_solution(const TrsProblem& p, double mu_star);

// Searches the hard-case solution set {q + V alpha : alpha on the reduced
// sphere} for the member of least Euclidean norm; returns it only when that
// norm fits inside ball_radius.
std::optional<Vec> alternate_in_ball(const Vec& q, const Mat& V,
                                     const TrsProblem& p, double ball_radius);

// min alpha^T S alpha + 2 b^T alpha  s.t.  ||alpha||^2 = s2 (equality).
// The multiplier is sign-free; used by the alternate searches.
Vec min_quadratic_on_sphere(const SymMatrix& S, const Vec& b, double s2,
                            const SolverConfig& cfg = {});

}  // namespace ttrs
