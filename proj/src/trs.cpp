#include "ttrs/trs.hpp"

#include <algorithm>
#include <cmath>

namespace ttrs {

namespace {

// Root of w(t) = sum_i beta2_i / (base_i + t)^2 = delta^2 for t > 0, given
// base_i >= 0 and w(0+) > delta^2. Safeguarded Newton on
// g(t) = 1/sqrt(w) - 1/delta inside a maintained bracket; the shifted
// parameterization keeps the critical denominator free of cancellation.
double secular_root(const Vec& base, const Vec& beta2, double delta,
                    const SolverConfig& cfg) {
  const double delta2 = delta * delta;
  auto w = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      const double d = base(i) + t;
      s += beta2(i) / (d * d);
    }
    return s;
  };
  auto wprime = [&](double t) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      const double d = base(i) + t;
      s += beta2(i) / (d * d * d);
    }
    return -2.0 * s;
  };

  const double beta_norm = std::sqrt(beta2.sum());
  if (beta_norm == 0.0) return 0.0;
  double lo = 0.0;
  double hi = beta_norm / delta;  // w(hi) <= delta^2 by construction
  double t = 0.5 * hi;
  for (int it = 0; it < cfg.max_secular_iter; ++it) {
    const double wt = w(t);
    if (std::abs(wt - delta2) <= cfg.secular_tol * delta2) break;
    if (wt > delta2) {
      lo = t;
    } else {
      hi = t;
    }
    const double g = 1.0 / std::sqrt(wt) - 1.0 / delta;
    const double gp = -0.5 * std::pow(wt, -1.5) * wprime(t);
    double next = gp > 0 ? t - g / gp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

// Coefficient form of min y^T Theta y + 2 btilde^T y on ||y||^2 = s2 with
// Theta diagonal ascending. Multiplier nu >= -theta_1, sign-free otherwise;
// the degenerate branch tops up along the first critical coordinate.
Vec equality_sphere_min(const Vec& theta, const Vec& btilde, double s2,
                        const SolverConfig& cfg) {
  const Eigen::Index r = theta.size();
  if (s2 <= 0.0) return Vec::Zero(r);
  const double s = std::sqrt(s2);
  const double t1 = theta(0);

  Eigen::Index ncrit = 1;
  while (ncrit < r && theta(ncrit) - t1 <= 1e-8 * (1.0 + std::abs(t1))) {
    ++ncrit;
  }
  Vec base(r), beta2(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    base(i) = theta(i) - t1;
    beta2(i) = btilde(i) * btilde(i);
  }
  double proj2 = 0.0;
  for (Eigen::Index i = 0; i < ncrit; ++i) proj2 += beta2(i);
  double wq = 0.0;
  for (Eigen::Index i = ncrit; i < r; ++i) {
    wq += beta2(i) / (base(i) * base(i));
  }

  Vec y = Vec::Zero(r);
  const bool degenerate =
      std::sqrt(proj2) <= cfg.hard_case_tol * (1.0 + btilde.norm());
  if (degenerate && wq <= s2) {
    for (Eigen::Index i = ncrit; i < r; ++i) y(i) = -btilde(i) / base(i);
    y(0) = std::sqrt(std::max(0.0, s2 - wq));
  } else {
    const double t = secular_root(base, beta2, s, cfg);
    for (Eigen::Index i = 0; i < r; ++i) y(i) = -btilde(i) / (base(i) + t);
    const double yn = y.norm();
    if (yn > 0) y *= s / yn;
  }
  return y;
}

}  // namespace

TrsProblem::TrsProblem(SymMatrix A_, Vec a_, SymMatrix B_, Vec c_,
                       double delta_)
    : A(std::move(A_)),
      a(std::move(a_)),
      B(std::move(B_)),
      c(std::move(c_)),
      delta(delta_) {
  if (A.n() != B.n() || a.size() != A.n() || c.size() != A.n()) {
    throw SolverError("TrsProblem: dimension mismatch");
  }
  if (!(delta > 0)) {
    throw SolverError("TrsProblem: radius must be positive");
  }
}

TrsProblem TrsProblem::ball(SymMatrix A_, Vec a_, double delta_) {
  const Eigen::Index n = A_.n();
  return TrsProblem(std::move(A_), std::move(a_), SymMatrix::identity(n),
                    Vec::Zero(n), delta_);
}

double TrsProblem::objective(const Vec& x) const {
  return 0.5 * x.dot(A.mat() * x) + a.dot(x);
}

double TrsProblem::constraint_value(const Vec& x) const {
  const Vec d = x - c;
  return d.dot(B.mat() * d);
}

TrsEngine::TrsEngine(const SymMatrix& A, const SymMatrix& B) : n_(A.n()) {
  if (A.n() != B.n()) throw SolverError("TrsEngine: dimension mismatch");
  Eigen::LLT<Mat> llt(B.mat());
  if (llt.info() != Eigen::Success) {
    throw SolverError("TrsEngine: constraint matrix not positive definite");
  }
  L_ = llt.matrixL();
  Mat T = L_.triangularView<Eigen::Lower>().solve(A.mat());
  T = L_.triangularView<Eigen::Lower>().solve(T.transpose().eval());
  sd_ = spectral(SymMatrix::from_symmetric(std::move(T)));
  back_ = L_.transpose().triangularView<Eigen::Upper>().solve(
      Mat(sd_.eigenvectors));
}

TrsSolution TrsEngine::solve(const Vec& a, const Vec& c, double delta,
                             const SolverConfig& cfg) const {
  if (a.size() != n_ || c.size() != n_) {
    throw SolverError("TrsEngine::solve: dimension mismatch");
  }
  if (!(delta > 0)) {
    throw SolverError("TrsEngine::solve: radius must be positive");
  }
  const Vec& theta = sd_.eigenvalues;
  const Mat& U = sd_.eigenvectors;
  const double t1 = theta(0);
  const double delta2 = delta * delta;

  // Reduced data for the shifted problem y = L^T (x - c):
  //   gamma = U^T L^T c,  beta = Theta gamma + U^T L^{-1} a.
  const Vec gamma = U.transpose() * (L_.transpose() * c).eval();
  const Vec beta =
      (theta.asDiagonal() * gamma).eval() +
      (U.transpose() * L_.triangularView<Eigen::Lower>().solve(a)).eval();

  // Objective of x(y) = c + L^{-T} U y in reduced terms:
  //   f = const + beta^T y + 1/2 sum theta_i y_i^2.
  const double f_const =
      0.5 * gamma.dot((theta.asDiagonal() * gamma).eval()) + a.dot(c);
  auto finish = [&](Vec y, double mu, bool hard) {
    TrsSolution s;
    s.x = c + back_ * y;
    s.mu = mu;
    s.hard_case = hard;
    s.objective =
        f_const + beta.dot(y) + 0.5 * y.dot((theta.asDiagonal() * y).eval());
    return s;
  };

  // Interior stationary point for a positive definite reduced Hessian.
  if (t1 > 0) {
    Vec y = -(beta.array() / theta.array()).matrix();
    if (y.squaredNorm() <= delta2) {
      return finish(std::move(y), 0.0, false);
    }
  }

  const double mu0 = t1 < 0 ? -t1 : 0.0;

  // theta_1 cluster; empty unless the pencil threshold is active (theta_1
  // negative or numerically zero).
  Eigen::Index ncrit = 0;
  if (t1 <= 1e-12 * (1.0 + std::abs(theta(n_ - 1)))) {
    ncrit = 1;
    while (ncrit < n_ && theta(ncrit) - t1 <= 1e-8 * (1.0 + std::abs(t1))) {
      ++ncrit;
    }
  }

  Vec base(n_);
  for (Eigen::Index i = 0; i < n_; ++i) base(i) = theta(i) + mu0;
  double proj2 = 0.0;
  for (Eigen::Index i = 0; i < ncrit; ++i) proj2 += beta(i) * beta(i);
  double wq = 0.0;
  for (Eigen::Index i = ncrit; i < n_; ++i) {
    wq += beta(i) * beta(i) / (base(i) * base(i));
  }

  const bool hard = ncrit > 0 &&
                    std::sqrt(proj2) <= cfg.hard_case_tol * (1.0 + a.norm()) &&
                    wq <= delta2;
  if (hard) {
    Vec ytil = Vec::Zero(n_);
    for (Eigen::Index i = ncrit; i < n_; ++i) ytil(i) = -beta(i) / base(i);
    Vec y = ytil;
    if (mu0 > 0) {
      // Complementarity forces the boundary; top up along the first critical
      // direction. ||y||^2 = wq + alpha^2 = delta^2 exactly by construction.
      y(0) = std::sqrt(std::max(0.0, delta2 - wq));
    }
    TrsSolution s = finish(std::move(y), mu0, true);
    s.q = c + back_ * ytil;
    s.V = back_.leftCols(ncrit);
    return s;
  }

  // Easy case: boundary multiplier mu = mu0 + t with t > 0.
  const double t = secular_root(base, beta.cwiseAbs2(), delta, cfg);
  Vec y(n_);
  for (Eigen::Index i = 0; i < n_; ++i) y(i) = -beta(i) / (base(i) + t);
  const double yn = y.norm();
  if (yn > 0 && t > 0) y *= delta / yn;
  return finish(std::move(y), mu0 + t, false);
}

bool TrsEngine::is_hard_case(const Vec& a, const Vec& c, double delta,
                             const SolverConfig& cfg) const {
  return solve(a, c, delta, cfg).hard_case;
}

TrsSolution solve_trs(const TrsProblem& p, const SolverConfig& cfg) {
  TrsEngine eng(p.A, p.B);
  return eng.solve(p.a, p.c, p.delta, cfg);
}

bool detect_hard_case(const TrsProblem& p, const SolverConfig& cfg) {
  TrsEngine eng(p.A, p.B);
  return eng.is_hard_case(p.a, p.c, p.delta, cfg);
}

std::pair<Vec, Mat> hard_case_solution(const TrsProblem& p, double mu_star,
                                       double sigma) {
  if (!(sigma > 0)) {
    throw SolverError("hard_case_solution: sigma must be positive");
  }
  const Mat P = p.A.mat() + mu_star * p.B.mat();
  Mat N = nullspace_basis(SymMatrix::from_symmetric(Mat(P)), 1e-8);
  if (N.cols() == 0) {
    throw SolverError("hard_case_solution: stationarity system is nonsingular");
  }
  Mat V = b_orthonormalize(N, p.B);
  const Mat BV = p.B.mat() * V;
  const Vec rhs = -(p.A.mat() * p.c + p.a);
  for (int attempt = 0; attempt < 2; ++attempt) {
    Mat H = P + sigma * BV * BV.transpose();
    Eigen::LLT<Mat> llt(Mat(0.5 * (H + H.transpose())));
    if (llt.info() == Eigen::Success) {
      Vec q = p.c + llt.solve(rhs);
      return {q, V};
    }
    sigma *= 64.0;
  }
  throw SolverError("hard_case_solution: regularized system stayed indefinite");
}

std::pair<Vec, Mat> hard_case_solution(const TrsProblem& p, double mu_star) {
  const double sigma = 1.0 + (p.A.mat() + mu_star * p.B.mat()).norm();
  return hard_case_solution(p, mu_star, sigma);
}

std::optional<Vec> alternate_in_ball(const Vec& q, const Mat& V,
                                     const TrsProblem& p, double ball_radius) {
  const Vec d = q - p.c;
  double s2 = p.delta * p.delta - d.dot(p.B.mat() * d);
  if (s2 < 0) {
    if (s2 < -1e-12) {
      throw InfeasibleReduction("alternate_in_ball: negative reduced radius");
    }
    s2 = 0.0;
  }
  const SymMatrix S = SymMatrix::from_symmetric(V.transpose() * V);
  const Vec b = V.transpose() * q;
  const Vec alpha = min_quadratic_on_sphere(S, b, s2);
  Vec x = q + V * alpha;
  if (x.squaredNorm() <= ball_radius * ball_radius * (1.0 + 1e-10)) {
    return x;
  }
  return std::nullopt;
}

Vec min_quadratic_on_sphere(const SymMatrix& S, const Vec& b, double s2,
                            const SolverConfig& cfg) {
  SpectralDecomp sd = spectral(S);
  const Vec btilde = sd.eigenvectors.transpose() * b;
  const Vec y = equality_sphere_min(sd.eigenvalues, btilde, s2, cfg);
  return sd.eigenvectors * y;
}

}  // namespace ttrs
