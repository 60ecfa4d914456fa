#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttrs/lngm.hpp"
#include "ttrs/trs.hpp"

namespace ttrs {

// min 1/2 x^T A x + a^T x  s.t.  ||x||^2 <= delta1^2,
//                                (x-c)^T B (x-c) <= delta2^2.
struct TtrsProblem {
  SymMatrix A;
  Vec a;
  SymMatrix B;
  Vec c;
  double delta1;
  double delta2;

  TtrsProblem(SymMatrix A_, Vec a_, SymMatrix B_, Vec c_, double delta1_,
              double delta2_);

  Eigen::Index n() const { return A.n(); }
  double objective(const Vec& x) const;
  double ball_value(const Vec& x) const;       // ||x||^2
  double ellipsoid_value(const Vec& x) const;  // (x-c)^T B (x-c)
  // Both constraints within a relative slack of rel.
  bool is_feasible(const Vec& x, double rel = 1e-8) const;
};

enum class CurvatureClass { PSD, OneNegative, ManyNegative, Unknown };
const char* to_string(CurvatureClass c);

struct KktPoint {
  Vec x;
  double gamma = 0.0;  // ball multiplier
  double mu = 0.0;     // ellipsoid multiplier
  // ||(A + gamma I + mu B) x + a - mu B c||
  double stationarity_residual = 0.0;
  // |gamma (||x||^2 - delta1^2)|, |mu ((x-c)^T B (x-c) - delta2^2)|
  std::pair<double, double> comp_residuals{0.0, 0.0};
  CurvatureClass curvature_class = CurvatureClass::Unknown;
  double h_min_eigenvalue = 0.0;  // smallest eigenvalue of A + gamma I + mu B
};

struct AdmmState {
  Vec x;
  Vec z;
  Vec lambda;
  double rho = 1.0;
  double tau = 0.9;
  int k = 0;
  double primal_residual = 0.0;
};

// The two single-constraint relaxations are tagged 1 (ball) and 4
// (ellipsoid) throughout; alternates are the hard-case searches over a
// relaxation's optimal set for a point satisfying the other constraint.
enum class CandidateSource {
  GlobalTrs1,
  GlobalTrs4,
  HardAlt1,
  HardAlt4,
  Lngm1,
  Lngm4,
  Admm
};
const char* to_string(CandidateSource s);

struct Candidate {
  Vec x;
  CandidateSource source = CandidateSource::Admm;
  bool feasible = false;
  double objective = 0.0;
  // Exact certificate multipliers when the producing solver knows them.
  std::optional<std::pair<double, double>> multipliers;
};

struct CandidatePool {
  std::vector<Candidate> entries;

  Candidate& add(const TtrsProblem& p, const Vec& x, CandidateSource source);
  void merge(const CandidatePool& other);
  // Feasible entry with the smallest objective; ties within 1e-12 go to the
  // source with the stronger guarantee (GlobalTrs > HardAlt > Lngm > Admm).
  const Candidate* best() const;
};

struct TraceRecord {
  int k = 0;
  double primal_residual = 0.0;
  double objective = 0.0;   // raw objective at x_k
  double lagrangian = 0.0;  // augmented Lagrangian L(x_k, z_k, lambda_k)
  // Descent inequality terms (zero at k = 0):
  //   lhs = L_{k-1} - L_k
  //   rhs = ((lambda_min(A) + rho)/2) ||dx||^2 - (1/(tau rho)) ||dlambda||^2
  double descent_lhs = 0.0;
  double descent_rhs = 0.0;
};

enum class SolveStatus { Infeasible, GlobalCertified, StationaryPoint, MaxIter };
const char* to_string(SolveStatus s);

// Parameter presets keyed by the structure of the instance family.
enum class Preset { LngmRich, NoLngm, Homogeneous };

struct HybridConfig {
  double tol = 1e-7;
  int max_iter = 1000;
  Preset preset = Preset::LngmRich;
  // Penalty; must exceed -lambda_min(A). Preset formula when unset.
  std::optional<double> rho;
  double tau = 0.9;
  std::optional<Vec> x0;
  std::optional<Vec> lambda0;
  // Extra ADMM runs launched from a feasible negative-curvature perturbation
  // of the incumbent when its certificate fails.
  int max_restarts = 6;
  SolverConfig trs;
  LngmConfig lngm;
  bool log_trace = true;
};

struct Timings {
  double feasibility = 0.0;
  double screening = 0.0;
  double lngm = 0.0;
  double admm = 0.0;
  double refine = 0.0;
  double total = 0.0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIter;
  std::optional<Candidate> best;
  std::optional<KktPoint> kkt;
  CandidatePool pool;
  std::vector<TraceRecord> trace;
  int admm_iterations = 0;
  double v_ch = 0.0;                // feasibility-gate optimal value
  std::optional<Vec> witness;       // feasibility witness when one exists
  Timings timings;
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<Vec> witness;
  double v_ch = 0.0;
};

// Minimizes (x-c)^T B (x-c) - delta2^2 over the ball; the sign of the
// optimal value decides feasibility of the intersection.
FeasibilityResult check_feasibility(const TtrsProblem& p,
                                    const SolverConfig& cfg = {});

// Globals of both relaxations plus hard-case alternate searches. Any
// feasible entry attains the relaxation bound and is therefore a certified
// global solution.
CandidatePool screen_global_candidates(const TtrsProblem& p,
                                       const SolverConfig& cfg = {});

// Local non-global minimizers of both relaxations, feasibility-flagged.
CandidatePool collect_lngm_candidates(const TtrsProblem& p,
                                      const LngmConfig& cfg = {});

// One splitting iteration: project z onto the ball, minimize the augmented
// Lagrangian in x over the ellipsoid, then the scaled dual update.
AdmmState admm_step(const AdmmState& state, const TtrsProblem& p,
                    const SolverConfig& cfg = {});

// Penalized-relaxation starting point: each side solves its own constraint's
// TRS with the other constraint moved into the objective at weight beta,
// doubling beta until the solution satisfies the other constraint; returns
// the feasible side with the lower raw objective.
Vec starting_point(const TtrsProblem& p, double beta1 = 1.0,
                   double beta2 = 1.0, const SolverConfig& cfg = {});

// KKT residuals and the curvature class of H(gamma, mu) = A + gamma I + mu B.
KktPoint certify(const TtrsProblem& p, const Vec& x, double gamma, double mu);

// Nonnegative least-squares multipliers at x, with a multiplier pinned to
// zero whenever its constraint is strictly inactive.
std::pair<double, double> recover_multipliers(const TtrsProblem& p,
                                              const Vec& x);

SolveReport solve(const TtrsProblem& p, const HybridConfig& cfg = {});

}  // namespace ttrs
