#include "ttrs/lngm.hpp"

#include <algorithm>
#include <cmath>

namespace ttrs {

double SecularFunction::phi(double lam) const {
  double s = 0.0;
  for (const auto& [li, wi] : coefficients) {
    const double d = li + lam;
    s += wi / (d * d);
  }
  return s;
}

double SecularFunction::dphi(double lam) const {
  double s = 0.0;
  for (const auto& [li, wi] : coefficients) {
    const double d = li + lam;
    s += wi / (d * d * d);
  }
  return -2.0 * s;
}

double SecularFunction::ddphi(double lam) const {
  double s = 0.0;
  for (const auto& [li, wi] : coefficients) {
    const double d = li + lam;
    s += wi / (d * d * d * d);
  }
  return 6.0 * s;
}

const char* to_string(LngmReason r) {
  switch (r) {
    case LngmReason::NoInterval:
      return "NoInterval";
    case LngmReason::OrthogonalToCriticalEigenvector:
      return "OrthogonalToCriticalEigenvector";
    case LngmReason::NoRoot:
      return "NoRoot";
    case LngmReason::RootFailsSlopeTest:
      return "RootFailsSlopeTest";
    case LngmReason::Found:
      return "Found";
  }
  return "?";
}

namespace {

// Newton iteration on phi(lambda) - target inside a sign-changing bracket,
// with bisection whenever the step leaves it.
double refine_root(const SecularFunction& f, double target, double lo,
                   double hi, const LngmConfig& cfg) {
  double lam = 0.5 * (lo + hi);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double val = f.phi(lam);
    if (std::abs(val - target) <= cfg.root_tol * target) return lam;
    if (val > target) {
      // phi decreasing left of the minimizer and increasing right of it;
      // the caller orients the bracket so that phi - target changes sign.
      if (f.dphi(lam) >= 0) {
        hi = lam;
      } else {
        lo = lam;
      }
    } else {
      if (f.dphi(lam) >= 0) {
        lo = lam;
      } else {
        hi = lam;
      }
    }
    const double dp = f.dphi(lam);
    double next = dp != 0.0 ? lam - (val - target) / dp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lam) break;
    lam = next;
  }
  return lam;
}

}  // namespace

std::vector<double> phi_roots(const SecularFunction& f, double delta1_sq,
                              const LngmConfig& cfg) {
  std::vector<double> roots;
  const double lo = f.lo, hi = f.hi;
  if (!(hi > lo)) return roots;
  const double width = hi - lo;

  // Minimizer of the strictly convex phi: bracket a sign change of phi'.
  double ml = lo, mr = hi;
  bool have_l = false, have_r = false;
  for (int k = 1; k <= 60 && !(have_l && have_r); ++k) {
    const double step = width * std::pow(0.5, k);
    if (!have_l && f.dphi(lo + step) < 0) {
      ml = lo + step;
      have_l = true;
    }
    if (!have_r && f.dphi(hi - step) > 0) {
      mr = hi - step;
      have_r = true;
    }
  }
  double lam_m;
  if (!have_l) {
    lam_m = lo + width * std::pow(0.5, 60);  // phi nondecreasing: min at lo
  } else if (!have_r) {
    lam_m = hi - width * std::pow(0.5, 60);
  } else {
    double a = ml, b = mr;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (f.dphi(mid) < 0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    lam_m = 0.5 * (a + b);
  }
  const double phi_min = f.phi(lam_m);
  if (phi_min > delta1_sq * (1.0 + cfg.root_tol)) return roots;

  // Left root: phi decreasing on (lo, lam_m); present when phi exceeds the
  // target somewhere near lo.
  {
    double bracket = -1.0;
    const double wl = lam_m - lo;
    for (int k = 1; k <= 90; ++k) {
      const double lam = lo + wl * std::pow(0.5, k);
      if (lam <= lo || lam >= lam_m) break;
      if (f.phi(lam) > delta1_sq) {
        bracket = lam;
        break;
      }
    }
    if (bracket > 0 && phi_min < delta1_sq) {
      roots.push_back(refine_root(f, delta1_sq, bracket, lam_m, cfg));
    }
  }

  // Right root: phi -> +infinity toward hi whenever w_1 > 0.
  {
    double bracket = -1.0;
    const double wr = hi - lam_m;
    for (int k = 1; k <= 900; ++k) {
      const double lam = hi - wr * std::pow(0.5, k);
      if (lam <= lam_m || lam >= hi) break;
      if (f.phi(lam) > delta1_sq) {
        bracket = lam;
        break;
      }
    }
    if (bracket > 0 && phi_min < delta1_sq) {
      roots.push_back(refine_root(f, delta1_sq, lam_m, bracket, cfg));
    } else if (phi_min >= delta1_sq * (1.0 - cfg.root_tol)) {
      roots.push_back(lam_m);  // tangency
    }
  }

  std::sort(roots.begin(), roots.end());
  if (roots.size() == 2 &&
      roots[1] - roots[0] <= 1e-12 * (1.0 + std::abs(roots[1]))) {
    roots.pop_back();
  }
  return roots;
}

LngmResult lngm(const SymMatrix& A, const Vec& a, double delta1,
                const LngmConfig& cfg) {
  LngmResult res;
  if (A.n() < 2) {
    res.reason = LngmReason::NoInterval;
    return res;
  }
  SpectralDecomp sd = spectral(A);
  const Vec& lam = sd.eigenvalues;
  const double l1 = lam(0), l2 = lam(1);
  if (l2 - l1 <= cfg.mult_tol * (1.0 + std::abs(l1))) {
    res.reason = LngmReason::NoInterval;
    return res;
  }
  const double lo = std::max(0.0, -l2);
  const double hi = -l1;
  if (!(lo < hi)) {
    res.reason = LngmReason::NoInterval;
    return res;
  }
  const Vec beta = sd.eigenvectors.transpose() * a;
  if (std::abs(beta(0)) <= cfg.orth_tol * a.norm()) {
    res.reason = LngmReason::OrthogonalToCriticalEigenvector;
    return res;
  }

  SecularFunction f;
  f.lo = lo;
  f.hi = hi;
  f.coefficients.reserve(A.n());
  for (Eigen::Index i = 0; i < A.n(); ++i) {
    f.coefficients.emplace_back(lam(i), beta(i) * beta(i));
  }

  const std::vector<double> roots = phi_roots(f, delta1 * delta1, cfg);
  if (roots.empty()) {
    res.reason = LngmReason::NoRoot;
    return res;
  }
  // By convexity only the largest root can satisfy the slope condition.
  double lstar = -1.0;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    if (f.dphi(*it) >= -1e-10) {
      lstar = *it;
      break;
    }
  }
  if (lstar < 0) {
    res.reason = LngmReason::RootFailsSlopeTest;
    return res;
  }

  Vec x = Vec::Zero(A.n());
  for (Eigen::Index i = 0; i < A.n(); ++i) {
    x -= (beta(i) / (lam(i) + lstar)) * sd.eigenvectors.col(i);
  }

  if (cfg.check_projected_hessian) {
    // Basis of the complement of x via Householder; the projected Hessian of
    // the shifted quadratic must be positive semidefinite at an LNGM.
    Eigen::HouseholderQR<Mat> qr(x);
    Mat Q = qr.householderQ();
    Mat V = Q.rightCols(A.n() - 1);
    Mat Hproj = V.transpose() * (A.mat() + lstar * Mat::Identity(A.n(), A.n())) * V;
    SpectralDecomp psd = spectral(SymMatrix::from_symmetric(std::move(Hproj)));
    if (psd.eigenvalues(0) < -1e-8 * (1.0 + std::abs(psd.eigenvalues(A.n() - 2)))) {
      res.reason = LngmReason::RootFailsSlopeTest;
      return res;
    }
  }

  res.exists = true;
  res.x = std::move(x);
  res.lambda_star = lstar;
  res.reason = LngmReason::Found;
  return res;
}

LngmResult lngm_ellipsoid(const SymMatrix& A, const Vec& a, const SymMatrix& B,
                          const Vec& c, double delta, const LngmConfig& cfg) {
  SpectralDecomp sb = spectral(B);
  if (sb.eigenvalues(0) <= 0) {
    throw NotPositiveDefiniteError("lngm_ellipsoid: B must be positive definite");
  }
  const Vec sq = sb.eigenvalues.cwiseSqrt();
  const Mat Bih =
      sb.eigenvectors * sq.cwiseInverse().asDiagonal() * sb.eigenvectors.transpose();
  const SymMatrix At = SymMatrix::from_symmetric(Bih * A.mat() * Bih);
  const Vec at = Bih * (A.mat() * c + a);
  LngmResult r = lngm(At, at, delta, cfg);
  if (r.exists) {
    r.x = c + Bih * (*r.x);
  }
  return r;
}

}  // namespace ttrs
