#include "ttrs/gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "ttrs/lngm.hpp"
#include "ttrs/rng.hpp"
#include "ttrs/trs.hpp"

namespace ttrs {

namespace {

constexpr int kMaxDraws = 100;

// Flips the vector so its largest-magnitude entry is positive, making
// eigenvector-based constructions reproducible across eigensolver sign
// choices.
void canonicalize_sign(Vec& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0) v = -v;
}

Mat orthogonal_from(Rng& rng, int n) { return rng.orthogonal(n); }

SymMatrix sym_with_spectrum(Rng& rng, const Vec& lam, int n) {
  Mat q = orthogonal_from(rng, n);
  return SymMatrix::from_symmetric(q * lam.asDiagonal() * q.transpose());
}

SymMatrix dense_spd(Rng& rng, int n) {
  Mat m = rng.normal_mat(n, n);
  return SymMatrix::from_symmetric(m * m.transpose() / double(n) +
                                   0.1 * Mat::Identity(n, n));
}

// Symmetric Erdos-Renyi mask: each unordered pair (including the diagonal)
// is present with the requested probability and carries a standard normal
// value. Entries off the mask stay exactly zero.
SymMatrix sparse_sym(Rng& rng, int n, double density) {
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (rng.uniform() < density) {
        double v = rng.normal();
        m(i, j) = v;
        m(j, i) = v;
      }
    }
  }
  return SymMatrix::from_symmetric(std::move(m));
}

SymMatrix sparse_spd(Rng& rng, int n, double density) {
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < density) m(i, j) = rng.normal();
    }
  }
  return SymMatrix::from_symmetric(m * m.transpose() +
                                   0.1 * Mat::Identity(n, n));
}

SymMatrix spd_for(Rng& rng, int n, double density) {
  return density >= 1.0 ? dense_spd(rng, n) : sparse_spd(rng, n, density);
}

// Square root and inverse square root of an SPD matrix.
std::pair<Mat, Mat> spd_sqrt_pair(const SymMatrix& B) {
  SpectralDecomp sd = spectral(B);
  Vec r = sd.eigenvalues.cwiseSqrt();
  Mat half = sd.eigenvectors * r.asDiagonal() * sd.eigenvectors.transpose();
  Mat inv_half = sd.eigenvectors * r.cwiseInverse().asDiagonal() *
                 sd.eigenvectors.transpose();
  return {half, inv_half};
}

// Plants a local non-global minimizer for the ellipsoid-side TRS: the
// construction runs in coordinates y = B^{1/2}(x - c) where that TRS is a
// ball TRS, then maps back. The planted point stays strictly inside the
// ball constraint while the ellipsoid-side global lands strictly outside,
// so the planted minimizer survives as a TTRS candidate on every draw.
GenResult class2_dense(const GenSpec& spec) {
  Rng rng(spec.seed);
  const int n = spec.n;
  Vec lam(n);
  lam(0) = rng.uniform(-10.0, -5.0);
  for (int i = 1; i < n; ++i) lam(i) = rng.uniform(lam(0) + 1.0, 10.0);
  Mat q = orthogonal_from(rng, n);
  Mat a_tilde_mat = q * lam.asDiagonal() * q.transpose();
  Vec v_tilde = q.col(0);
  canonicalize_sign(v_tilde);

  const double delta2 = 1.0;
  double lam2 = lam.tail(n - 1).minCoeff();
  double lo = std::max(0.0, -lam2);
  double hi = -lam(0);
  double mu0 = lo + rng.uniform(0.85, 0.97) * (hi - lo);
  Vec a_tilde = -(lam(0) + mu0) * v_tilde;

  SymMatrix B = spd_for(rng, n, spec.density);
  auto [b_half, b_inv_half] = spd_sqrt_pair(B);
  SymMatrix A = SymMatrix::from_symmetric(b_half * a_tilde_mat * b_half);

  Vec u_vec = b_inv_half * v_tilde;
  double t_c = rng.uniform(0.15, 0.45);
  Vec c = -t_c * u_vec;
  Vec a = b_half * a_tilde - A.mat() * c;
  double lo_r = (1.0 - t_c) * u_vec.norm();
  double hi_r = (1.0 + t_c) * u_vec.norm();
  double delta1 = std::sqrt(0.5 * (lo_r * lo_r + hi_r * hi_r));

  GenResult out{TtrsProblem(A, a, B, c, delta1, delta2), {}, {}};
  out.points["x_lngm4"] = (1.0 - t_c) * u_vec;
  out.points["x_global4"] = -(1.0 + t_c) * u_vec;
  out.scalars["lambda_star_4"] = mu0;
  out.scalars["lambda1_transformed"] = lam(0);
  out.scalars["t_c"] = t_c;
  out.scalars["objective_lngm4"] = out.problem.objective(out.points["x_lngm4"]);
  return out;
}

// Plants the local non-global minimizer for the ball-side TRS: a is chosen
// so the unit eigenvector v1 is that minimizer with multiplier mu0, and the
// added ellipsoid separates v1 (kept feasible) from the ball-side global
// -v1 (made infeasible).
GenResult class2_sparse(const GenSpec& spec) {
  Rng rng(spec.seed);
  const int n = spec.n;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    SymMatrix A = sparse_sym(rng, n, spec.density);
    SpectralDecomp sd = spectral(A);
    double lam1 = sd.eigenvalues(0);
    double lam2 = sd.eigenvalues(1);
    if (lam1 >= -1e-3) continue;
    if (lam2 - lam1 <= 1e-6 * (1.0 + std::abs(lam1))) continue;

    Vec v1 = sd.eigenvectors.col(0);
    canonicalize_sign(v1);
    const double delta1 = 1.0;
    double lo = std::max(0.0, -lam2);
    double hi = -lam1;
    double mu0 = lo + rng.uniform(0.1, 0.9) * (hi - lo);
    Vec a = -(A.mat() * v1 + mu0 * v1);

    SymMatrix B = spd_for(rng, n, spec.density);
    double t = rng.uniform(0.2, 0.8);
    Vec c = t * v1;
    double vbv = v1.dot(B.mat() * v1);
    double q_keep = (1.0 - t) * (1.0 - t) * vbv;
    double q_cut = (1.0 + t) * (1.0 + t) * vbv;
    double delta2 = std::sqrt(0.5 * (q_keep + q_cut));

    GenResult out{TtrsProblem(A, a, B, c, delta1, delta2), {}, {}};
    out.points["x_lngm1"] = v1;
    out.points["x_global1"] = -v1;
    out.scalars["lambda_star_1"] = mu0;
    out.scalars["lambda1"] = lam1;
    out.scalars["t_c"] = t;
    out.scalars["objective_lngm1"] = out.problem.objective(v1);
    return out;
  }
  throw GenError("class2: no admissible sparse draw in 100 attempts");
}

// Both ways of removing the ball-side local non-global minimizer: a repeated
// smallest eigenvalue, or a linear term exactly orthogonal to its
// eigenvector. The center/radius rejection loop then pushes every certified
// relaxation global outside the feasible region.
GenResult class3(const GenSpec& spec) {
  const bool multiplicity = spec.cls == GenClass::NoLngmMultiplicity;
  if (multiplicity && spec.n < 3) {
    throw GenError("class3: eigenvalue-multiplicity variant needs n >= 3");
  }
  if (multiplicity && spec.density < 1.0) {
    throw GenError(
        "class3: eigenvalue-multiplicity variant only supports density 1");
  }
  Rng rng(spec.seed);
  const int n = spec.n;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    SymMatrix A = SymMatrix::identity(n);
    Vec a;
    if (multiplicity) {
      Vec lam(n);
      lam(0) = rng.uniform(-10.0, -5.0);
      lam(1) = lam(0);
      for (int i = 2; i < n; ++i) lam(i) = rng.uniform(lam(0) + 1.0, 10.0);
      A = sym_with_spectrum(rng, lam, n);
      a = rng.normal_vec(n);
    } else {
      if (spec.density >= 1.0) {
        Vec lam(n);
        lam(0) = rng.uniform(-10.0, -5.0);
        for (int i = 1; i < n; ++i) lam(i) = rng.uniform(lam(0) + 1.0, 10.0);
        A = sym_with_spectrum(rng, lam, n);
      } else {
        A = sparse_sym(rng, n, spec.density);
        SpectralDecomp sd = spectral(A);
        if (sd.eigenvalues(0) >= -1e-3) continue;
        if (sd.eigenvalues(1) - sd.eigenvalues(0) <=
            1e-6 * (1.0 + std::abs(sd.eigenvalues(0)))) {
          continue;
        }
      }
      SpectralDecomp sd = spectral(A);
      Vec v1 = sd.eigenvectors.col(0);
      a = rng.normal_vec(n);
      a -= v1.dot(a) * v1;
      if (a.norm() < 1e-3) continue;
    }

    SymMatrix B = spd_for(rng, n, spec.density);
    const double delta1 = 1.0;
    TrsSolution ball = solve_trs(TrsProblem::ball(A, a, delta1));
    if (ball.x.norm() < 1e-9) continue;
    Vec dir = ball.x / ball.x.norm();
    double t = rng.uniform(0.3, 0.9);
    Vec c = t * dir;
    // c is strictly inside the ball, so the feasibility minimum is 0 and any
    // delta2^2 below the value at the ball global keeps TTRS feasible while
    // cutting that global off.
    Vec d = ball.x - c;
    double g1 = d.dot(B.mat() * d);
    if (g1 <= 1e-10) continue;
    double delta2 = std::sqrt(rng.uniform(0.05, 0.6) * g1);

    TtrsProblem p(A, a, B, c, delta1, delta2);
    LngmResult l = lngm(A, a, delta1);
    if (l.exists) continue;
    if (multiplicity && l.reason != LngmReason::NoInterval) continue;
    if (!multiplicity &&
        l.reason != LngmReason::OrthogonalToCriticalEigenvector) {
      continue;
    }
    if (screen_global_candidates(p).best() != nullptr) continue;

    GenResult out{std::move(p), {}, {}};
    out.points["x_global1"] = ball.x;
    out.scalars["t_c"] = t;
    out.scalars["method_multiplicity"] = multiplicity ? 1.0 : 0.0;
    return out;
  }
  throw GenError("class3: no admissible draw in 100 attempts");
}

GenResult class4(const GenSpec& spec) {
  Rng rng(spec.seed);
  const int n = spec.n;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    SymMatrix A = SymMatrix::identity(n);
    if (spec.density >= 1.0) {
      Vec lam(n);
      lam(0) = rng.uniform(-10.0, -1.0);
      lam(n - 1) = rng.uniform(1.0, 10.0);
      for (int i = 1; i + 1 < n; ++i) lam(i) = rng.uniform(-10.0, 10.0);
      A = sym_with_spectrum(rng, lam, n);
    } else {
      A = sparse_sym(rng, n, spec.density);
      SpectralDecomp sd = spectral(A);
      if (sd.eigenvalues(0) >= -1e-6 || sd.eigenvalues(n - 1) <= 1e-6) {
        continue;
      }
    }
    SymMatrix B = spd_for(rng, n, spec.density);
    double delta1 = rng.uniform(0.5, 2.0);
    double delta2 = rng.uniform(0.5, 2.0);
    GenResult out{
        TtrsProblem(A, Vec::Zero(n), B, Vec::Zero(n), delta1, delta2),
        {},
        {}};
    out.scalars["lambda1"] = spectral(A).eigenvalues(0);
    return out;
  }
  throw GenError("class4: no indefinite sparse draw in 100 attempts");
}

GenResult make_example1() {
  Mat am(2, 2);
  am << -8, 2, 2, -4;
  Vec a(2);
  a << 1, 1;
  Vec bd(2);
  bd << 3, 1;
  TtrsProblem p(SymMatrix::from_symmetric(am), a, SymMatrix::diagonal(bd),
                Vec::Zero(2), 1.0, std::sqrt(2.0));
  GenResult out{std::move(p), {}, {}};
  const double s = 1.0 / std::sqrt(2.0);
  Vec xp(2), xm(2), xa(2);
  xp << s, -s;
  xm << -s, s;
  xa << -s, -s;
  out.points["x_opt_plus"] = xp;
  out.points["x_opt_minus"] = xm;
  out.points["x_attractor"] = xa;
  out.scalars["objective"] = -4.0;
  out.scalars["objective_attractor"] = -2.0 - std::sqrt(2.0);
  return out;
}

GenResult make_example2() {
  Mat am(2, 2);
  am << -8, 2, 2, -4;
  Vec a(2);
  a << 1, 1;
  Vec bd(2);
  bd << 2.25, 0.25;
  TtrsProblem p(SymMatrix::from_symmetric(am), a, SymMatrix::diagonal(bd),
                Vec::Zero(2), 1.0, 1.0);
  const double r3 = std::sqrt(3.0 / 8.0);
  const double r5 = std::sqrt(5.0 / 8.0);
  GenResult out{std::move(p), {}, {}};
  Vec xo(2), s1(2), s2(2), s3(2);
  xo << r3, -r5;
  s1 << -r3, r5;
  s2 << r3, r5;
  s3 << -r3, -r5;
  out.points["x_opt"] = xo;
  out.points["x_stationary_1"] = s1;
  out.points["x_stationary_2"] = s2;
  out.points["x_stationary_3"] = s3;
  out.scalars["objective"] = out.problem.objective(xo);
  return out;
}

Vec project_intersection(const TtrsProblem& p, Vec x) {
  for (int it = 0; it < 80; ++it) {
    double bn = x.norm();
    if (bn > p.delta1) x *= p.delta1 / bn;
    if (p.ellipsoid_value(x) > p.delta2 * p.delta2) {
      TrsProblem proj(SymMatrix::identity(int(p.n())), -x, p.B, p.c, p.delta2);
      x = solve_trs(proj).x;
    }
    if (p.is_feasible(x, 1e-12)) break;
  }
  return x;
}

}  // namespace

std::string to_string(GenClass cls) {
  switch (cls) {
    case GenClass::LngmEngineered:
      return "LngmEngineered";
    case GenClass::NoLngmMultiplicity:
      return "NoLngmMultiplicity";
    case GenClass::NoLngmOrthogonal:
      return "NoLngmOrthogonal";
    case GenClass::Homogeneous:
      return "Homogeneous";
    case GenClass::Example1:
      return "Example1";
    case GenClass::Example2:
      return "Example2";
  }
  return "?";
}

std::string class_slug(GenClass cls) {
  switch (cls) {
    case GenClass::LngmEngineered:
      return "lngm_engineered";
    case GenClass::NoLngmMultiplicity:
      return "no_lngm_multiplicity";
    case GenClass::NoLngmOrthogonal:
      return "no_lngm_orthogonal";
    case GenClass::Homogeneous:
      return "homogeneous";
    case GenClass::Example1:
      return "example1";
    case GenClass::Example2:
      return "example2";
  }
  return "?";
}

std::optional<GenClass> parse_gen_class(std::string_view text) {
  for (GenClass cls :
       {GenClass::LngmEngineered, GenClass::NoLngmMultiplicity,
        GenClass::NoLngmOrthogonal, GenClass::Homogeneous, GenClass::Example1,
        GenClass::Example2}) {
    if (text == to_string(cls) || text == class_slug(cls)) return cls;
  }
  return std::nullopt;
}

GenResult generate(const GenSpec& spec) {
  if (spec.cls != GenClass::Example1 && spec.cls != GenClass::Example2) {
    if (spec.n < 2) throw GenError("generate: n must be at least 2");
    if (!(spec.density > 0.0) || spec.density > 1.0) {
      throw GenError("generate: density must lie in (0, 1]");
    }
  }
  switch (spec.cls) {
    case GenClass::LngmEngineered:
      return spec.density >= 1.0 ? class2_dense(spec) : class2_sparse(spec);
    case GenClass::NoLngmMultiplicity:
    case GenClass::NoLngmOrthogonal:
      return class3(spec);
    case GenClass::Homogeneous:
      return class4(spec);
    case GenClass::Example1:
      return make_example1();
    case GenClass::Example2:
      return make_example2();
  }
  throw GenError("generate: unknown class");
}

std::vector<GenResult> worked_examples() {
  std::vector<GenResult> out;
  out.push_back(make_example1());
  out.push_back(make_example2());
  return out;
}

std::string instance_name(const GenSpec& spec, int index) {
  char density[32];
  std::snprintf(density, sizeof(density), "%g", spec.density);
  return class_slug(spec.cls) + "_n" + std::to_string(spec.n) + "_d" +
         density + "_s" + std::to_string(spec.seed + std::uint64_t(index));
}

OracleResult oracle_2d(const TtrsProblem& p, int grid) {
  if (p.n() != 2) throw std::invalid_argument("oracle_2d: problem must be 2-D");
  if (grid < 2) throw std::invalid_argument("oracle_2d: grid must be >= 2");

  struct Sample {
    double f;
    Vec x;
  };
  std::vector<Sample> best;
  const std::size_t keep = 10;
  const double d1 = p.delta1;
  const double step = 2.0 * d1 / grid;
  Vec x(2);
  for (int i = 0; i < grid; ++i) {
    x(0) = -d1 + (i + 0.5) * step;
    for (int j = 0; j < grid; ++j) {
      x(1) = -d1 + (j + 0.5) * step;
      if (x.squaredNorm() > d1 * d1) continue;
      if (p.ellipsoid_value(x) > p.delta2 * p.delta2) continue;
      double f = p.objective(x);
      if (best.size() < keep) {
        best.push_back({f, x});
        std::push_heap(best.begin(), best.end(),
                       [](const Sample& l, const Sample& r) { return l.f < r.f; });
      } else if (f < best.front().f) {
        std::pop_heap(best.begin(), best.end(),
                      [](const Sample& l, const Sample& r) { return l.f < r.f; });
        best.back() = {f, x};
        std::push_heap(best.begin(), best.end(),
                       [](const Sample& l, const Sample& r) { return l.f < r.f; });
      }
    }
  }
  if (best.empty()) {
    throw EmptyFeasibleSample("oracle_2d: no grid sample is feasible");
  }

  const double lip = p.A.mat().norm() + 1.0;
  OracleResult out{best.front().x, best.front().f};
  for (const Sample& s : best) {
    Vec xc = project_intersection(p, s.x);
    double fc = p.objective(xc);
    // Adaptive base step: growth after clean steps lets the iteration crawl
    // into corners of the intersection where fixed steps stall.
    double base = 1.0 / lip;
    for (int it = 0; it < 2000; ++it) {
      Vec g = p.A.mat() * xc + p.a;
      double stepsize = base;
      bool improved = false;
      for (int bt = 0; bt < 60; ++bt) {
        Vec y = project_intersection(p, xc - stepsize * g);
        double fy = p.objective(y);
        if (fy < fc - 1e-16 * (1.0 + std::abs(fc))) {
          xc = y;
          fc = fy;
          base = bt == 0 ? std::min(stepsize * 2.0, 1e6 / lip) : stepsize;
          improved = true;
          break;
        }
        stepsize *= 0.5;
      }
      if (!improved) break;
    }
    if (p.is_feasible(xc, 1e-10) && fc < out.objective) {
      out.x = xc;
      out.objective = fc;
    }
  }
  return out;
}

}  // namespace ttrs
