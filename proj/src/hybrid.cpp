#include "ttrs/hybrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttrs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Tie-break order in the candidate pool: sources with a stronger optimality
// guarantee win.
int source_rank(CandidateSource s) {
  switch (s) {
    case CandidateSource::GlobalTrs1:
    case CandidateSource::GlobalTrs4:
      return 0;
    case CandidateSource::HardAlt1:
    case CandidateSource::HardAlt4:
      return 1;
    case CandidateSource::Lngm1:
    case CandidateSource::Lngm4:
      return 2;
    case CandidateSource::Admm:
      return 3;
  }
  return 3;
}

double aug_lagrangian(const TtrsProblem& p, const AdmmState& st) {
  const Vec d = st.x - st.z;
  return p.objective(st.x) + st.lambda.dot(d) + 0.5 * st.rho * d.squaredNorm();
}

// One splitting iteration against a prebuilt engine for the pencil
// (A + rho I, B); the public admm_step wraps this with a fresh engine.
AdmmState admm_step_engine(const AdmmState& st, const TtrsProblem& p,
                           const TrsEngine& eng, const SolverConfig& cfg) {
  AdmmState nx = st;
  const Vec v = st.x + st.lambda / st.rho;
  const double nv = v.norm();
  nx.z = nv <= p.delta1 ? v : Vec(v * (p.delta1 / nv));
  const Vec lin = p.a + st.lambda - st.rho * nx.z;
  nx.x = eng.solve(lin, p.c, p.delta2, cfg).x;
  nx.lambda = st.lambda + st.tau * st.rho * (nx.x - nx.z);
  nx.k = st.k + 1;
  nx.primal_residual = (nx.x - nx.z).norm();
  return nx;
}

struct AdmmRun {
  AdmmState state;
  bool converged = false;
  int iterations = 0;
};

AdmmRun run_admm(const TtrsProblem& p, const TrsEngine& eng, const Vec& x0,
                 const Vec& lambda0, double rho, double eig1,
                 const HybridConfig& cfg, std::vector<TraceRecord>& trace) {
  AdmmRun run;
  AdmmState st;
  st.x = x0;
  st.z = x0;
  st.lambda = lambda0;
  st.rho = rho;
  st.tau = cfg.tau;
  st.k = 0;
  st.primal_residual = 0.0;
  double L_prev = aug_lagrangian(p, st);
  if (cfg.log_trace) {
    trace.push_back({0, st.primal_residual, p.objective(st.x), L_prev, 0.0, 0.0});
  }
  std::vector<double> running_min;
  running_min.reserve(static_cast<size_t>(cfg.max_iter));
  for (int k = 1; k <= cfg.max_iter; ++k) {
    AdmmState nx;
    try {
      nx = admm_step_engine(st, p, eng, cfg.trs);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " (admm iteration " +
                        std::to_string(k) + ")");
    }
    const double L = aug_lagrangian(p, nx);
    if (cfg.log_trace) {
      const double lhs = L_prev - L;
      const double rhs =
          0.5 * (eig1 + rho) * (nx.x - st.x).squaredNorm() -
          (nx.lambda - st.lambda).squaredNorm() / (cfg.tau * rho);
      trace.push_back({k, nx.primal_residual, p.objective(nx.x), L, lhs, rhs});
    }
    L_prev = L;
    st = std::move(nx);
    run.iterations = k;
    if (st.primal_residual <= cfg.tol) {
      run.converged = true;
      break;
    }
    const double m = running_min.empty()
                         ? st.primal_residual
                         : std::min(running_min.back(), st.primal_residual);
    running_min.push_back(m);
    // Stagnation guard: the best primal residual failed to improve by 1e-3
    // relative over the last 100 iterations.
    const size_t w = 100;
    if (running_min.size() > w &&
        running_min.back() >
            (1.0 - 1e-3) * running_min[running_min.size() - 1 - w]) {
      break;
    }
  }
  run.state = std::move(st);
  return run;
}

struct Refined {
  Vec x;
  double gamma = 0.0;
  double mu = 0.0;
  bool ok = false;
};

// Newton polish of the stationarity system for one assumed active set, with
// inactive multipliers pinned to zero. Rejected if the iteration stalls,
// leaves the neighborhood of x_in, or produces negative multipliers.
Refined refine_with(const TtrsProblem& p, const Vec& x_in, bool act_ball,
                    bool act_ell) {
  Refined out;
  const Eigen::Index n = p.n();
  Vec x = x_in;
  // Unrestricted least-squares fit of the included multipliers; the Newton
  // iteration corrects any residual error.
  double gamma = 0.0;
  double mu = 0.0;
  {
    const Vec r = -(p.A.mat() * x + p.a);
    const Vec g1 = x;
    const Vec g2 = p.B.mat() * (x - p.c);
    const double a11 = g1.squaredNorm();
    const double a22 = g2.squaredNorm();
    const double a12 = g1.dot(g2);
    const double det = a11 * a22 - a12 * a12;
    if (act_ball && act_ell && det > 1e-14 * a11 * a22) {
      gamma = (a22 * g1.dot(r) - a12 * g2.dot(r)) / det;
      mu = (a11 * g2.dot(r) - a12 * g1.dot(r)) / det;
    } else if (act_ball && a11 > 0.0) {
      gamma = g1.dot(r) / a11;
    } else if (act_ell && a22 > 0.0) {
      mu = g2.dot(r) / a22;
    }
    gamma = std::max(gamma, 0.0);
    mu = std::max(mu, 0.0);
  }
  const Eigen::Index m = n + (act_ball ? 1 : 0) + (act_ell ? 1 : 0);

  auto residual = [&](const Vec& xx, double g, double mm) {
    Vec F(m);
    F.head(n) =
        p.A.mat() * xx + p.a + g * xx + mm * (p.B.mat() * (xx - p.c));
    Eigen::Index row = n;
    if (act_ball) F(row++) = 0.5 * (xx.squaredNorm() - p.delta1 * p.delta1);
    if (act_ell) {
      const Vec d = xx - p.c;
      F(row++) = 0.5 * (d.dot(p.B.mat() * d) - p.delta2 * p.delta2);
    }
    return F;
  };

  const double fscale = 1.0 + p.a.norm() + x_in.norm();
  Vec F = residual(x, gamma, mu);
  for (int it = 0; it < 40; ++it) {
    if (F.norm() <= 1e-12 * fscale) break;
    Mat J = Mat::Zero(m, m);
    J.topLeftCorner(n, n) =
        p.A.mat() + gamma * Mat::Identity(n, n) + mu * p.B.mat();
    Eigen::Index col = n;
    if (act_ball) {
      J.block(0, col, n, 1) = x;
      J.block(col, 0, 1, n) = x.transpose();
      ++col;
    }
    if (act_ell) {
      const Vec g2 = p.B.mat() * (x - p.c);
      J.block(0, col, n, 1) = g2;
      J.block(col, 0, 1, n) = g2.transpose();
      ++col;
    }
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible()) break;
    const Vec d = lu.solve(-F);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Vec xx = x + step * d.head(n);
      double g = gamma;
      double mm = mu;
      Eigen::Index row = n;
      if (act_ball) g += step * d(row++);
      if (act_ell) mm += step * d(row++);
      const Vec Fn = residual(xx, g, mm);
      if (Fn.norm() <= (1.0 - 0.25 * step) * F.norm() ||
          Fn.norm() <= 1e-12 * fscale) {
        x = std::move(xx);
        gamma = g;
        mu = mm;
        F = Fn;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  if (F.norm() > 1e-10 * fscale) return out;
  if (gamma < -1e-10 || mu < -1e-10) return out;
  if ((x - x_in).norm() > 1e-2 * (1.0 + x_in.norm())) return out;
  if (!act_ball && p.ball_value(x) > p.delta1 * p.delta1 * (1.0 + 1e-8)) {
    return out;
  }
  if (!act_ell &&
      p.ellipsoid_value(x) > p.delta2 * p.delta2 * (1.0 + 1e-8)) {
    return out;
  }
  out.x = std::move(x);
  out.gamma = std::max(gamma, 0.0);
  out.mu = std::max(mu, 0.0);
  out.ok = true;
  return out;
}

// Tries plausible active sets in order of how close each constraint sits to
// its boundary at x_in; the first polish that converges and passes the sign,
// locality, and inactive-feasibility checks wins. ADMM limits can sit a few
// orders of magnitude off a boundary that is active at the true stationary
// point, so value snapshots alone are not trusted.
Refined refine_kkt(const TtrsProblem& p, const Vec& x_in) {
  const double rb = p.ball_value(x_in) / (p.delta1 * p.delta1) - 1.0;
  const double re =
      p.ellipsoid_value(x_in) / (p.delta2 * p.delta2) - 1.0;
  std::vector<std::pair<bool, bool>> sets;
  auto push = [&sets](bool ab, bool ae) {
    for (const auto& s : sets) {
      if (s.first == ab && s.second == ae) return;
    }
    sets.emplace_back(ab, ae);
  };
  push(rb >= -1e-5, re >= -1e-5);
  push(rb >= -1e-3, re >= -1e-3);
  if (rb >= -1e-2 && re >= -1e-2) push(true, true);
  if (re >= -1e-3) push(false, true);
  if (rb >= -1e-3) push(true, false);
  push(false, false);
  for (const auto& [ab, ae] : sets) {
    Refined r = refine_with(p, x_in, ab, ae);
    if (r.ok) return r;
  }
  return {};
}

// Alternating exact projections onto the two constraint sets; both are
// convex, so the sequence converges to a point of the intersection.
Vec pocs_project(const TtrsProblem& p, Vec x, const SolverConfig& cfg) {
  for (int it = 0; it < 60; ++it) {
    if (p.is_feasible(x, 1e-10)) break;
    const double nb = x.norm();
    if (nb > p.delta1) x *= p.delta1 / nb;
    if (p.ellipsoid_value(x) > p.delta2 * p.delta2) {
      TrsProblem proj(SymMatrix::identity(p.n()), -x, p.B, p.c, p.delta2);
      x = solve_trs(proj, cfg).x;
    }
  }
  return x;
}

struct SideOutcome {
  std::optional<Vec> x;
  double objective = std::numeric_limits<double>::infinity();
};

// One side of the penalized starting-point search. side 0 keeps the ball
// constraint and penalizes the ellipsoid; side 1 mirrors the roles. The
// first non-degenerate penalized solution satisfying the other constraint
// ends the search; degenerate (hard-case) solves nudge beta by 65/64 and
// are kept as fallbacks when they happen to be feasible.
SideOutcome run_side(const TtrsProblem& p, int side, double beta_init,
                     const SolverConfig& cfg) {
  SideOutcome out;
  const Eigen::Index n = p.n();
  auto solve_pen = [&](double beta) {
    if (side == 0) {
      SymMatrix Ap =
          SymMatrix::from_symmetric(p.A.mat() + 2.0 * beta * p.B.mat());
      Vec ap = p.a - 2.0 * beta * (p.B.mat() * p.c);
      return solve_trs(TrsProblem::ball(Ap, ap, p.delta1), cfg);
    }
    SymMatrix Ap = SymMatrix::from_symmetric(
        p.A.mat() + 2.0 * beta * Mat::Identity(n, n));
    return solve_trs(TrsProblem(Ap, p.a, p.B, p.c, p.delta2), cfg);
  };
  auto other_ok = [&](const Vec& x) {
    return side == 0
               ? p.ellipsoid_value(x) <= p.delta2 * p.delta2 * (1.0 + 1e-8)
               : p.ball_value(x) <= p.delta1 * p.delta1 * (1.0 + 1e-8);
  };
  auto record = [&](const Vec& x) {
    if (!other_ok(x)) return;
    const double f = p.objective(x);
    if (!out.x || f < out.objective) {
      out.x = x;
      out.objective = f;
    }
  };

  TrsSolution probe = solve_pen(0.0);
  if (!probe.hard_case && other_ok(probe.x)) {
    out.x = probe.x;
    out.objective = p.objective(probe.x);
    return out;
  }
  record(probe.x);
  // A zero linear term is invariant under the penalty shift, so every
  // further solve stays degenerate; the probe already captured the side.
  if (p.a.norm() == 0.0 && p.c.norm() == 0.0) return out;
  if (beta_init <= 0.0) return out;

  double beta = beta_init;
  const double cap = std::ldexp(beta_init, 20);
  int nudges = 0;
  for (int iter = 0; iter < 80 && beta <= cap && nudges <= 40; ++iter) {
    TrsSolution s = solve_pen(beta);
    if (s.hard_case) {
      record(s.x);
      beta *= 65.0 / 64.0;
      ++nudges;
      continue;
    }
    if (other_ok(s.x)) {
      out.x = s.x;
      out.objective = p.objective(s.x);
      return out;
    }
    beta *= 2.0;
  }
  return out;
}

SolveStatus classify(const KktPoint& k, const HybridConfig& cfg) {
  const bool kkt_ok = k.stationarity_residual <= cfg.tol &&
                      k.comp_residuals.first <= cfg.tol &&
                      k.comp_residuals.second <= cfg.tol;
  if (kkt_ok && k.h_min_eigenvalue >= -cfg.tol) {
    return SolveStatus::GlobalCertified;
  }
  if (k.stationarity_residual <= 100.0 * cfg.tol) {
    return SolveStatus::StationaryPoint;
  }
  return SolveStatus::MaxIter;
}

// Feasible point strictly decreasing the objective along a negative
// curvature direction of H at a stationary x. The restriction of the
// objective to the feasible segment is quadratic: when concave an
// endpoint is optimal, otherwise the interior critical point competes.
std::optional<Vec> escape_start(const TtrsProblem& p, const Vec& x,
                                const Vec& v) {
  // Feasible t-range on the ball: ||x + t v||^2 <= delta1^2.
  auto range = [](double qa, double qb, double qc) {
    // qa t^2 + 2 qb t + qc <= 0 with qa > 0 and qc <= 0 (x feasible).
    const double disc = qb * qb - qa * qc;
    if (disc <= 0.0) return std::pair<double, double>(0.0, 0.0);
    const double s = std::sqrt(disc);
    return std::pair<double, double>((-qb - s) / qa, (-qb + s) / qa);
  };
  const double vv = v.squaredNorm();
  if (vv <= 0.0) return std::nullopt;
  auto [b_lo, b_hi] =
      range(vv, x.dot(v), x.squaredNorm() - p.delta1 * p.delta1);
  const Vec d = x - p.c;
  const Vec Bv = p.B.mat() * v;
  auto [e_lo, e_hi] = range(v.dot(Bv), d.dot(Bv),
                            d.dot(p.B.mat() * d) - p.delta2 * p.delta2);
  const double lo = std::max(b_lo, e_lo);
  const double hi = std::min(b_hi, e_hi);
  if (!(lo < hi)) return std::nullopt;
  const double f0 = p.objective(x);
  std::vector<double> ts = {lo, hi};
  const double q = v.dot(p.A.mat() * v);
  if (q > 0.0) {
    const double t_int = -(p.A.mat() * x + p.a).dot(v) / q;
    if (lo < t_int && t_int < hi) ts.push_back(t_int);
  }
  std::optional<Vec> best;
  double fbest = f0 - 1e-14 * (1.0 + std::abs(f0));
  for (double t : ts) {
    Vec cand = x + t * v;
    const double f = p.objective(cand);
    if (f < fbest) {
      fbest = f;
      best = std::move(cand);
    }
  }
  return best;
}

// For a = 0 and c = 0 the both-active subproblem has a one-dimensional
// concave dual in the pencil weight mu >= 0.  The weighted bottom
// eigenvector value h(mu) = delta1^2 v1(A + mu B)' B v1 - delta2^2 is
// decreasing across the dual maximizer; when both single-constraint
// globals are infeasible, h brackets a sign change on (0, mu0) where
// lambda1(A + mu0 B) = 0.  The root yields x with both constraints
// active and A + gamma I + mu B = (A + mu B) - lambda1 I >= 0.
struct HomogeneousCorner {
  Vec x;
  double gamma;
  double mu;
};

std::optional<HomogeneousCorner> homogeneous_corner(const TtrsProblem& p) {
  const int n = p.A.n();
  if (n < 2) return std::nullopt;
  const double d1sq = p.delta1 * p.delta1;
  const double d2sq = p.delta2 * p.delta2;
  struct Probe {
    double lambda1;
    double h;
    Vec v1;
  };
  auto probe = [&](double mu) {
    SymMatrix M = SymMatrix::from_symmetric(
        p.A.mat() + mu * p.B.mat());
    SpectralDecomp sd = spectral(M);
    Probe out;
    out.lambda1 = sd.eigenvalues(0);
    out.v1 = sd.eigenvectors.col(0);
    out.h = d1sq * out.v1.dot(p.B.mat() * out.v1) - d2sq;
    return out;
  };
  Probe at0 = probe(0.0);
  if (at0.lambda1 >= 0.0 || at0.h <= 0.0) return std::nullopt;

  // mu_hi: smallest probed weight with lambda1(A + mu B) >= 0.  The
  // pencil bottom eigenvalue is increasing in mu because B > 0.
  SpectralDecomp sb = spectral(p.B);
  const double b_min = sb.eigenvalues(0);
  if (b_min <= 0.0) return std::nullopt;
  double mu_hi = -at0.lambda1 / b_min + 1.0;
  double mu_lo = 0.0;
  {
    // Tighten mu_hi to the lambda1 = 0 crossing so the h-bisection
    // stays on the branch with a nonnegative ball multiplier.
    double zlo = 0.0, zhi = mu_hi;
    for (int i = 0; i < 80 && (zhi - zlo) > 1e-13 * (1.0 + zhi); ++i) {
      const double mid = 0.5 * (zlo + zhi);
      if (probe(mid).lambda1 < 0.0) {
        zlo = mid;
      } else {
        zhi = mid;
      }
    }
    mu_hi = zlo;
  }
  Probe hi = probe(mu_hi);
  if (hi.h > 0.0) return std::nullopt;

  Probe lo = at0;
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (mu_lo + mu_hi);
    Probe pm = probe(mid);
    if (std::abs(pm.h) <= 1e-12 * d2sq) {
      lo = pm;
      mu_lo = mu_hi = mid;
      break;
    }
    if (pm.h > 0.0) {
      mu_lo = mid;
      lo = pm;
    } else {
      mu_hi = mid;
      hi = pm;
    }
    if (mu_hi - mu_lo <= 1e-14 * (1.0 + mu_hi)) break;
  }

  const double mu_star = 0.5 * (mu_lo + mu_hi);
  Probe ps = probe(mu_star);
  Vec u;
  if (std::abs(ps.h) <= 1e-9 * d2sq) {
    u = ps.v1;
  } else {
    // h jumps across an eigenvalue crossing: combine the bottom two
    // eigenvectors to hit the ellipsoid level inside the eigenspace.
    SymMatrix M = SymMatrix::from_symmetric(
        p.A.mat() + mu_star * p.B.mat());
    SpectralDecomp sd = spectral(M);
    ps.lambda1 = sd.eigenvalues(0);
    const Vec w1 = sd.eigenvectors.col(0);
    const Vec w2 = sd.eigenvectors.col(1);
    const double s11 = w1.dot(p.B.mat() * w1);
    const double s12 = w1.dot(p.B.mat() * w2);
    const double s22 = w2.dot(p.B.mat() * w2);
    const double target = d2sq / d1sq;
    const double m = 0.5 * (s11 + s22);
    const double rc = 0.5 * (s11 - s22);
    const double r = std::hypot(rc, s12);
    if (r <= 0.0 || std::abs(target - m) > r) return std::nullopt;
    const double ang =
        0.5 * (std::atan2(s12, rc) + std::acos((target - m) / r));
    u = std::cos(ang) * w1 + std::sin(ang) * w2;
    u.normalize();
  }
  HomogeneousCorner out;
  out.x = p.delta1 * u;
  out.gamma = -ps.lambda1;
  out.mu = mu_star;
  if (!(out.gamma >= 0.0) || !std::isfinite(out.gamma)) return std::nullopt;
  const double ell = out.x.dot(p.B.mat() * out.x);
  if (std::abs(ell - d2sq) > 1e-6 * d2sq) return std::nullopt;
  return out;
}

// Least-squares multipliers for the both-active stationarity system,
// clamped to the nonnegative orthant.
std::pair<double, double> corner_multipliers(const TtrsProblem& p,
                                             const Vec& x) {
  const Vec r = -(p.A.mat() * x + p.a);
  const Vec g1 = x;
  const Vec g2 = p.B.mat() * (x - p.c);
  const double a11 = g1.squaredNorm();
  const double a22 = g2.squaredNorm();
  const double a12 = g1.dot(g2);
  const double det = a11 * a22 - a12 * a12;
  double gamma = 0.0, mu = 0.0;
  if (det > 1e-14 * a11 * a22) {
    const double b1 = g1.dot(r);
    const double b2 = g2.dot(r);
    gamma = (b1 * a22 - b2 * a12) / det;
    mu = (b2 * a11 - b1 * a12) / det;
  }
  return {std::max(gamma, 0.0), std::max(mu, 0.0)};
}

// In two dimensions the both-active set is a finite set of intersection
// points of the two boundary curves, located by a sign scan of the
// ellipsoid residual around the ball circle. Corners whose exact
// multipliers are nonnegative are ADMM fixed points.
std::vector<Vec> corner_points_2d(const TtrsProblem& p) {
  std::vector<Vec> out;
  const double d2sq = p.delta2 * p.delta2;
  auto at = [&](double th) {
    Vec x(2);
    x << p.delta1 * std::cos(th), p.delta1 * std::sin(th);
    return x;
  };
  auto gval = [&](double th) { return p.ellipsoid_value(at(th)) - d2sq; };
  constexpr int kCells = 720;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double prev = gval(0.0);
  for (int i = 1; i <= kCells; ++i) {
    const double lo = kTwoPi * (i - 1) / kCells;
    const double hi = kTwoPi * i / kCells;
    const double cur = gval(hi);
    if (prev == 0.0) {
      out.push_back(at(lo));
    } else if (prev * cur < 0.0) {
      double a = lo, b = hi, ga = prev;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (a + b);
        const double gm = gval(mid);
        if (ga * gm <= 0.0) {
          b = mid;
        } else {
          a = mid;
          ga = gm;
        }
      }
      out.push_back(at(0.5 * (a + b)));
    }
    prev = cur;
  }
  return out;
}

}  // namespace

TtrsProblem::TtrsProblem(SymMatrix A_, Vec a_, SymMatrix B_, Vec c_,
                         double delta1_, double delta2_)
    : A(std::move(A_)),
      a(std::move(a_)),
      B(std::move(B_)),
      c(std::move(c_)),
      delta1(delta1_),
      delta2(delta2_) {
  if (a.size() != A.n() || B.n() != A.n() || c.size() != A.n()) {
    throw std::invalid_argument("ttrs problem: inconsistent dimensions");
  }
  if (!(delta1 > 0.0) || !(delta2 > 0.0)) {
    throw std::invalid_argument("ttrs problem: radii must be positive");
  }
}

double TtrsProblem::objective(const Vec& x) const {
  return 0.5 * x.dot(A.mat() * x) + a.dot(x);
}

double TtrsProblem::ball_value(const Vec& x) const { return x.squaredNorm(); }

double TtrsProblem::ellipsoid_value(const Vec& x) const {
  const Vec d = x - c;
  return d.dot(B.mat() * d);
}

bool TtrsProblem::is_feasible(const Vec& x, double rel) const {
  return ball_value(x) <= delta1 * delta1 * (1.0 + rel) &&
         ellipsoid_value(x) <= delta2 * delta2 * (1.0 + rel);
}

const char* to_string(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::PSD:
      return "PSD";
    case CurvatureClass::OneNegative:
      return "OneNegative";
    case CurvatureClass::ManyNegative:
      return "ManyNegative";
    case CurvatureClass::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

const char* to_string(CandidateSource s) {
  switch (s) {
    case CandidateSource::GlobalTrs1:
      return "GlobalTrs1";
    case CandidateSource::GlobalTrs4:
      return "GlobalTrs4";
    case CandidateSource::HardAlt1:
      return "HardAlt1";
    case CandidateSource::HardAlt4:
      return "HardAlt4";
    case CandidateSource::Lngm1:
      return "Lngm1";
    case CandidateSource::Lngm4:
      return "Lngm4";
    case CandidateSource::Admm:
      return "Admm";
  }
  return "Admm";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::GlobalCertified:
      return "GlobalCertified";
    case SolveStatus::StationaryPoint:
      return "StationaryPoint";
    case SolveStatus::MaxIter:
      return "MaxIter";
  }
  return "MaxIter";
}

Candidate& CandidatePool::add(const TtrsProblem& p, const Vec& x,
                              CandidateSource source) {
  Candidate c;
  c.x = x;
  c.source = source;
  c.feasible = p.is_feasible(x, 1e-8);
  c.objective = p.objective(x);
  entries.push_back(std::move(c));
  return entries.back();
}

void CandidatePool::merge(const CandidatePool& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

const Candidate* CandidatePool::best() const {
  const Candidate* b = nullptr;
  for (const auto& e : entries) {
    if (!e.feasible) continue;
    if (!b) {
      b = &e;
      continue;
    }
    const double scale =
        1.0 + std::max(std::abs(e.objective), std::abs(b->objective));
    const double diff = e.objective - b->objective;
    if (diff < -1e-12 * scale ||
        (std::abs(diff) <= 1e-12 * scale &&
         source_rank(e.source) < source_rank(b->source))) {
      b = &e;
    }
  }
  return b;
}

FeasibilityResult check_feasibility(const TtrsProblem& p,
                                    const SolverConfig& cfg) {
  SymMatrix Af = SymMatrix::from_symmetric(2.0 * p.B.mat());
  Vec af = -2.0 * (p.B.mat() * p.c);
  TrsSolution s = solve_trs(TrsProblem::ball(Af, af, p.delta1), cfg);
  FeasibilityResult r;
  const double cBc = p.c.dot(p.B.mat() * p.c);
  r.v_ch = s.objective + cBc - p.delta2 * p.delta2;
  r.feasible = r.v_ch <= 1e-10;
  if (r.feasible) r.witness = s.x;
  return r;
}

CandidatePool screen_global_candidates(const TtrsProblem& p,
                                       const SolverConfig& cfg) {
  CandidatePool pool;
  TrsSolution s1 = solve_trs(TrsProblem::ball(p.A, p.a, p.delta1), cfg);
  pool.add(p, s1.x, CandidateSource::GlobalTrs1).multipliers = {
      {s1.mu, 0.0}};
  if (s1.hard_case && s1.q && s1.V) {
    // Search the optimal set {q + V alpha} for the least ellipsoid value.
    double s2 = p.delta1 * p.delta1 - s1.q->squaredNorm();
    if (s2 > -1e-12) {
      s2 = std::max(s2, 0.0);
      const Mat& V = *s1.V;
      Vec alt;
      if (s2 == 0.0) {
        alt = *s1.q;
      } else {
        SymMatrix S =
            SymMatrix::from_symmetric(V.transpose() * p.B.mat() * V);
        Vec b = V.transpose() * (p.B.mat() * (*s1.q - p.c));
        alt = *s1.q + V * min_quadratic_on_sphere(S, b, s2, cfg);
      }
      pool.add(p, alt, CandidateSource::HardAlt1).multipliers = {{s1.mu, 0.0}};
    }
  }
  TrsProblem form4(p.A, p.a, p.B, p.c, p.delta2);
  TrsSolution s4 = solve_trs(form4, cfg);
  pool.add(p, s4.x, CandidateSource::GlobalTrs4).multipliers = {
      {0.0, s4.mu}};
  if (s4.hard_case && s4.q && s4.V) {
    if (auto alt = alternate_in_ball(*s4.q, *s4.V, form4, p.delta1)) {
      pool.add(p, *alt, CandidateSource::HardAlt4).multipliers = {
          {0.0, s4.mu}};
    }
  }
  return pool;
}

CandidatePool collect_lngm_candidates(const TtrsProblem& p,
                                      const LngmConfig& cfg) {
  CandidatePool pool;
  LngmResult r1 = lngm(p.A, p.a, p.delta1, cfg);
  if (r1.exists) {
    pool.add(p, *r1.x, CandidateSource::Lngm1).multipliers = {
        {*r1.lambda_star, 0.0}};
  }
  LngmResult r4 = lngm_ellipsoid(p.A, p.a, p.B, p.c, p.delta2, cfg);
  if (r4.exists) {
    pool.add(p, *r4.x, CandidateSource::Lngm4).multipliers = {
        {0.0, *r4.lambda_star}};
  }
  return pool;
}

AdmmState admm_step(const AdmmState& state, const TtrsProblem& p,
                    const SolverConfig& cfg) {
  if (!(state.rho > 0.0) || !(state.tau > 0.0 && state.tau < 1.0)) {
    throw std::invalid_argument("admm state: need rho > 0 and tau in (0,1)");
  }
  SymMatrix Ar = SymMatrix::from_symmetric(
      p.A.mat() + state.rho * Mat::Identity(p.n(), p.n()));
  TrsEngine eng(Ar, p.B);
  return admm_step_engine(state, p, eng, cfg);
}

Vec starting_point(const TtrsProblem& p, double beta1, double beta2,
                   const SolverConfig& cfg) {
  if (beta1 < 0.0 || beta2 < 0.0) {
    throw std::invalid_argument("starting point: betas must be nonnegative");
  }
  SideOutcome s1 = run_side(p, 0, beta1, cfg);
  SideOutcome s2 = run_side(p, 1, beta2, cfg);
  if (s1.x && (!s2.x || s1.objective <= s2.objective)) return *s1.x;
  if (s2.x) return *s2.x;
  FeasibilityResult fr = check_feasibility(p, cfg);
  if (fr.witness) return *fr.witness;
  throw SolverError("starting point: problem appears infeasible");
}

KktPoint certify(const TtrsProblem& p, const Vec& x, double gamma,
                 double mu) {
  KktPoint k;
  k.x = x;
  k.gamma = gamma;
  k.mu = mu;
  const Eigen::Index n = p.n();
  const Mat H =
      p.A.mat() + gamma * Mat::Identity(n, n) + mu * p.B.mat();
  k.stationarity_residual = (H * x + p.a - mu * (p.B.mat() * p.c)).norm();
  const double bv = p.ball_value(x);
  const double ev = p.ellipsoid_value(x);
  const double d1 = p.delta1 * p.delta1;
  const double d2 = p.delta2 * p.delta2;
  k.comp_residuals = {std::abs(gamma * (bv - d1)), std::abs(mu * (ev - d2))};
  SpectralDecomp sd = spectral(SymMatrix::from_symmetric(H));
  k.h_min_eigenvalue = sd.eigenvalues(0);
  int negative = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sd.eigenvalues(i) < -1e-8) ++negative;
  }
  // Certificates assume independent active gradients; a tangential contact
  // of both boundaries leaves the multipliers underdetermined.
  bool licq_fail = false;
  if (std::abs(bv - d1) <= 1e-8 * d1 && std::abs(ev - d2) <= 1e-8 * d2) {
    const Vec g1 = 2.0 * x;
    const Vec g2 = 2.0 * (p.B.mat() * (x - p.c));
    const double n1 = g1.norm();
    const double n2 = g2.norm();
    if (n1 * n2 == 0.0 ||
        std::abs(g1.dot(g2)) >= (1.0 - 1e-10) * n1 * n2) {
      licq_fail = true;
    }
  }
  if (licq_fail) {
    k.curvature_class = CurvatureClass::Unknown;
  } else if (negative == 0) {
    k.curvature_class = CurvatureClass::PSD;
  } else if (negative == 1) {
    k.curvature_class = CurvatureClass::OneNegative;
  } else {
    k.curvature_class = CurvatureClass::ManyNegative;
  }
  return k;
}

std::pair<double, double> recover_multipliers(const TtrsProblem& p,
                                              const Vec& x) {
  const Vec r = -(p.A.mat() * x + p.a);
  const Vec g1 = x;
  const Vec g2 = p.B.mat() * (x - p.c);
  const bool allow_g =
      p.ball_value(x) >= p.delta1 * p.delta1 * (1.0 - 1e-8);
  const bool allow_m =
      p.ellipsoid_value(x) >= p.delta2 * p.delta2 * (1.0 - 1e-8);
  double best_g = 0.0;
  double best_m = 0.0;
  double best_res = r.norm();
  auto consider = [&](double g, double m) {
    if (g < 0.0 || m < 0.0) return;
    if ((!allow_g && g != 0.0) || (!allow_m && m != 0.0)) return;
    const double res = (g * g1 + m * g2 - r).norm();
    if (res < best_res) {
      best_res = res;
      best_g = g;
      best_m = m;
    }
  };
  const double a11 = g1.squaredNorm();
  const double a22 = g2.squaredNorm();
  if (allow_g && allow_m) {
    const double a12 = g1.dot(g2);
    const double det = a11 * a22 - a12 * a12;
    if (det > 1e-14 * a11 * a22) {
      const double b1 = g1.dot(r);
      const double b2 = g2.dot(r);
      consider((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det);
    }
  }
  if (allow_g && a11 > 0.0) {
    consider(std::max(0.0, g1.dot(r) / a11), 0.0);
  }
  if (allow_m && a22 > 0.0) {
    consider(0.0, std::max(0.0, g2.dot(r) / a22));
  }
  return {best_g, best_m};
}

SolveReport solve(const TtrsProblem& p, const HybridConfig& cfg) {
  const auto t0 = Clock::now();
  if (!(cfg.tol > 0.0) || cfg.max_iter <= 0) {
    throw std::invalid_argument("hybrid config: tol > 0, max_iter > 0");
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw std::invalid_argument("hybrid config: tau in (0,1)");
  }
  SolveReport rep;
  const Eigen::Index n = p.n();
  const double eig1 = spectral(p.A).eigenvalues(0);
  double rho;
  if (cfg.rho) {
    rho = *cfg.rho;
    if (rho <= std::max(0.0, -eig1)) {
      throw std::invalid_argument(
          "hybrid config: rho must exceed max(0, -lambda_min(A))");
    }
  } else {
    rho = (cfg.preset == Preset::NoLngm ? 2.0 : 4.0) * std::abs(eig1) + 1.0;
  }
  const double lam0_mult = cfg.preset == Preset::LngmRich ? 2.0 : 4.0;

  auto t_step = Clock::now();
  FeasibilityResult fr = check_feasibility(p, cfg.trs);
  rep.v_ch = fr.v_ch;
  rep.witness = fr.witness;
  rep.timings.feasibility = seconds_since(t_step);
  if (!fr.feasible) {
    rep.status = SolveStatus::Infeasible;
    rep.timings.total = seconds_since(t0);
    return rep;
  }

  auto finalize = [&](const Candidate& b) {
    rep.best = b;
    auto mult =
        b.multipliers ? *b.multipliers : recover_multipliers(p, b.x);
    rep.kkt = certify(p, b.x, mult.first, mult.second);
    rep.status = classify(*rep.kkt, cfg);
  };

  t_step = Clock::now();
  rep.pool = screen_global_candidates(p, cfg.trs);
  rep.timings.screening = seconds_since(t_step);
  if (const Candidate* g = rep.pool.best()) {
    // A feasible relaxation optimum attains the lower bound: certified.
    finalize(*g);
    rep.timings.total = seconds_since(t0);
    return rep;
  }

  t_step = Clock::now();
  rep.pool.merge(collect_lngm_candidates(p, cfg.lngm));
  rep.timings.lngm = seconds_since(t_step);

  t_step = Clock::now();
  TrsEngine eng(
      SymMatrix::from_symmetric(p.A.mat() + rho * Mat::Identity(n, n)),
      p.B);
  const Vec canonical = starting_point(p, 1.0, 1.0, cfg.trs);
  std::vector<std::pair<Vec, Vec>> starts;
  auto push_start = [&](const Vec& x0, Vec l0) {
    starts.emplace_back(x0, std::move(l0));
  };
  if (cfg.x0) {
    push_start(*cfg.x0, cfg.lambda0 ? *cfg.lambda0 : Vec(lam0_mult * *cfg.x0));
    if ((*cfg.x0 - canonical).norm() > 1e-12 * (1.0 + canonical.norm())) {
      push_start(canonical, Vec(lam0_mult * canonical));
    }
  } else {
    push_start(canonical, cfg.lambda0 ? *cfg.lambda0
                                      : Vec(lam0_mult * canonical));
  }
  if (p.a.isZero(0.0) && p.c.isZero(0.0)) {
    // Homogeneous problems admit an exactly constructible both-active
    // stationary point with a PSD Lagrangian Hessian; seeding the ADMM
    // pass at it with the matching dual state makes it a fixed point.
    if (auto hc = homogeneous_corner(p)) {
      push_start(hc->x, Vec(hc->gamma * hc->x));
    }
  }
  if (n == 2) {
    // Corner trajectories: a corner with nonnegative exact multipliers is
    // already stationary and its trajectory collapses onto it; any other
    // corner just seeds one more descent.
    for (const Vec& xc : corner_points_2d(p)) {
      const double gc = corner_multipliers(p, xc).first;
      push_start(xc, Vec(gc * xc));
    }
  }

  // One trajectory contributes one candidate: the Newton-polished limit when
  // the polish holds, otherwise the (feasibility-projected) raw endpoint.
  auto launch = [&](const TrsEngine& engine, double rho_run, const Vec& x0,
                    const Vec& l0) {
    AdmmRun run = run_admm(p, engine, x0, l0, rho_run, eig1, cfg, rep.trace);
    rep.admm_iterations += run.iterations;
    Candidate& cand = rep.pool.add(p, run.state.x, CandidateSource::Admm);
    const double near = 1e-3 * (1.0 + run.state.x.norm());
    if (run.state.primal_residual <= near) {
      Refined rf = refine_kkt(p, run.state.x);
      if (rf.ok) {
        cand.x = rf.x;
        cand.feasible = p.is_feasible(rf.x, 1e-8);
        cand.objective = p.objective(rf.x);
        cand.multipliers = {{rf.gamma, rf.mu}};
        return run.converged;
      }
    }
    if (!cand.feasible) {
      Vec proj = pocs_project(p, run.state.x, cfg.trs);
      cand.x = std::move(proj);
      cand.feasible = p.is_feasible(cand.x, 1e-8);
      cand.objective = p.objective(cand.x);
      cand.multipliers.reset();
    }
    return run.converged;
  };

  for (const auto& [x0, l0] : starts) {
    launch(eng, rho, x0, l0);
  }
  if (!rep.pool.best() && fr.witness) {
    rep.pool.add(p, *fr.witness, CandidateSource::Admm);
  }
  rep.timings.admm = seconds_since(t_step);

  // Certify the incumbent, then spend the restart budget on whichever defect
  // the certificate shows: a non-stationary incumbent continues ADMM with a
  // stiffer coupling, a stationary one with negative curvature restarts from
  // a strictly better feasible point along that curvature. Stops on
  // certification or when an attempt brings neither a lower objective nor a
  // materially smaller stationarity residual.
  t_step = Clock::now();
  int restarts = 0;
  double rho_boost = 1.0;
  double prev_obj = std::numeric_limits<double>::infinity();
  double prev_stat = std::numeric_limits<double>::infinity();
  while (true) {
    const Candidate* b = rep.pool.best();
    if (!b) {
      rep.status = SolveStatus::MaxIter;
      break;
    }
    finalize(*b);
    if (rep.status == SolveStatus::GlobalCertified ||
        restarts >= cfg.max_restarts) {
      break;
    }
    const bool progressed =
        b->objective < prev_obj - 1e-13 * (1.0 + std::abs(prev_obj)) ||
        rep.kkt->stationarity_residual < 0.5 * prev_stat;
    if (restarts > 0 && !progressed) break;
    prev_obj = b->objective;
    prev_stat = rep.kkt->stationarity_residual;

    if (rep.status == SolveStatus::MaxIter) {
      rho_boost *= 4.0;
      TrsEngine stiff(SymMatrix::from_symmetric(
                          p.A.mat() + rho_boost * rho * Mat::Identity(n, n)),
                      p.B);
      launch(stiff, rho_boost * rho, b->x, Vec(lam0_mult * b->x));
      ++restarts;
      continue;
    }
    if (rep.kkt->h_min_eigenvalue >= -cfg.tol) break;
    const Mat H = p.A.mat() + rep.kkt->gamma * Mat::Identity(n, n) +
                  rep.kkt->mu * p.B.mat();
    const Vec v = spectral(SymMatrix::from_symmetric(H)).eigenvectors.col(0);
    auto x0e = escape_start(p, b->x, v);
    if (!x0e) break;
    launch(eng, rho, *x0e, Vec(lam0_mult * *x0e));
    ++restarts;
  }
  rep.timings.refine = seconds_since(t_step);
  rep.timings.total = seconds_since(t0);
  return rep;
}

}  // namespace ttrs
