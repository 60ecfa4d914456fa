#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ttrs/gen.hpp"
#include "ttrs/lngm.hpp"
#include "ttrs/trs.hpp"

using namespace ttrs;

namespace {

bool close_to(const Vec& x, const Vec& y, double tol) {
  return (x - y).norm() <= tol * (1.0 + y.norm());
}

}  // namespace

TEST_CASE("engineered class keeps the planted minimizer feasible (dense)") {
  for (int s = 0; s < 24; ++s) {
    GenSpec spec;
    spec.n = (s % 3 == 0) ? 5 : (s % 3 == 1 ? 20 : 60);
    spec.cls = GenClass::LngmEngineered;
    spec.seed = 100 + std::uint64_t(s);
    GenResult r = generate(spec);
    const TtrsProblem& p = r.problem;
    CAPTURE(s);

    REQUIRE(r.points.count("x_lngm4") == 1);
    REQUIRE(r.points.count("x_global4") == 1);
    const Vec& xl = r.points.at("x_lngm4");
    const Vec& xg = r.points.at("x_global4");

    CHECK(p.is_feasible(xl, 1e-8));
    CHECK(xg.norm() > p.delta1 * (1.0 + 1e-9));

    LngmResult l = lngm_ellipsoid(p.A, p.a, p.B, p.c, p.delta2);
    REQUIRE(l.exists);
    CHECK(close_to(*l.x, xl, 1e-6));
    CHECK(l.lambda_star ==
          doctest::Approx(r.scalars.at("lambda_star_4")).epsilon(1e-6));

    TrsSolution g = solve_trs(TrsProblem(p.A, p.a, p.B, p.c, p.delta2));
    CHECK(close_to(g.x, xg, 1e-6));
    CHECK(g.objective < p.objective(xl) - 1e-9);

    CHECK(check_feasibility(p).feasible);
  }
}

TEST_CASE("engineered class keeps the planted minimizer feasible (sparse)") {
  for (int s = 0; s < 10; ++s) {
    GenSpec spec;
    spec.n = 60;
    spec.density = 0.1;
    spec.cls = GenClass::LngmEngineered;
    spec.seed = 500 + std::uint64_t(s);
    GenResult r = generate(spec);
    const TtrsProblem& p = r.problem;
    CAPTURE(s);

    const Vec& xl = r.points.at("x_lngm1");
    const Vec& xg = r.points.at("x_global1");
    CHECK(p.is_feasible(xl, 1e-8));
    CHECK(p.ellipsoid_value(xg) > p.delta2 * p.delta2 * (1.0 + 1e-9));

    LngmResult l = lngm(p.A, p.a, p.delta1);
    REQUIRE(l.exists);
    CHECK(close_to(*l.x, xl, 1e-6));
    CHECK(l.lambda_star ==
          doctest::Approx(r.scalars.at("lambda_star_1")).epsilon(1e-6));

    TrsSolution g = solve_trs(TrsProblem::ball(p.A, p.a, p.delta1));
    CHECK(close_to(g.x, xg, 1e-6));
    CHECK(g.objective < p.objective(xl) - 1e-9);
  }
}

TEST_CASE("engineered class: solve is never worse than the planted point") {
  for (int s = 0; s < 8; ++s) {
    GenSpec spec;
    spec.n = 20;
    spec.cls = GenClass::LngmEngineered;
    spec.seed = 900 + std::uint64_t(s);
    GenResult r = generate(spec);
    SolveReport rep = solve(r.problem);
    REQUIRE(rep.best.has_value());
    CHECK(rep.best->objective <= r.scalars.at("objective_lngm4") + 1e-8);
    CHECK(rep.status != SolveStatus::Infeasible);
  }
}

TEST_CASE("no-lngm classes really have none") {
  SUBCASE("eigenvalue multiplicity") {
    for (int s = 0; s < 8; ++s) {
      GenSpec spec;
      spec.n = 6;
      spec.cls = GenClass::NoLngmMultiplicity;
      spec.seed = 30 + std::uint64_t(s);
      GenResult r = generate(spec);
      const TtrsProblem& p = r.problem;
      CAPTURE(s);
      LngmResult l = lngm(p.A, p.a, p.delta1);
      CHECK_FALSE(l.exists);
      CHECK(l.reason == LngmReason::NoInterval);
      CHECK(screen_global_candidates(p).best() == nullptr);
      CHECK(check_feasibility(p).feasible);
      CHECK_FALSE(p.is_feasible(r.points.at("x_global1"), 1e-6));
    }
  }
  SUBCASE("orthogonal linear term, dense") {
    for (int s = 0; s < 8; ++s) {
      GenSpec spec;
      spec.n = 6;
      spec.cls = GenClass::NoLngmOrthogonal;
      spec.seed = 60 + std::uint64_t(s);
      GenResult r = generate(spec);
      const TtrsProblem& p = r.problem;
      CAPTURE(s);
      LngmResult l = lngm(p.A, p.a, p.delta1);
      CHECK_FALSE(l.exists);
      CHECK(l.reason == LngmReason::OrthogonalToCriticalEigenvector);
      CHECK(screen_global_candidates(p).best() == nullptr);
      CHECK(check_feasibility(p).feasible);
    }
  }
  SUBCASE("orthogonal linear term, sparse") {
    for (int s = 0; s < 3; ++s) {
      GenSpec spec;
      spec.n = 40;
      spec.density = 0.1;
      spec.cls = GenClass::NoLngmOrthogonal;
      spec.seed = 90 + std::uint64_t(s);
      GenResult r = generate(spec);
      LngmResult l = lngm(r.problem.A, r.problem.a, r.problem.delta1);
      CHECK_FALSE(l.exists);
      CHECK(l.reason == LngmReason::OrthogonalToCriticalEigenvector);
    }
  }
  SUBCASE("multiplicity variant rejects unsupported specs") {
    GenSpec spec;
    spec.n = 2;
    spec.cls = GenClass::NoLngmMultiplicity;
    CHECK_THROWS_AS(generate(spec), GenError);
    spec.n = 6;
    spec.density = 0.1;
    CHECK_THROWS_AS(generate(spec), GenError);
  }
}

TEST_CASE("homogeneous class structure and certification") {
  SUBCASE("dense") {
    for (int s = 0; s < 10; ++s) {
      GenSpec spec;
      spec.n = 6;
      spec.cls = GenClass::Homogeneous;
      spec.seed = 200 + std::uint64_t(s);
      GenResult r = generate(spec);
      const TtrsProblem& p = r.problem;
      CAPTURE(s);
      CHECK(p.a.norm() == 0.0);
      CHECK(p.c.norm() == 0.0);
      SpectralDecomp sa = spectral(p.A);
      CHECK(sa.eigenvalues(0) < 0.0);
      CHECK(sa.eigenvalues(p.n() - 1) > 0.0);
      CHECK(spectral(p.B).eigenvalues(0) > 0.0);

      SolveReport rep = solve(p);
      REQUIRE(rep.best.has_value());
      CHECK(rep.best->objective <= 1e-12);
      CHECK(rep.status == SolveStatus::GlobalCertified);
    }
  }
  SUBCASE("sparse") {
    for (int s = 0; s < 3; ++s) {
      GenSpec spec;
      spec.n = 40;
      spec.density = 0.1;
      spec.cls = GenClass::Homogeneous;
      spec.seed = 300 + std::uint64_t(s);
      GenResult r = generate(spec);
      CAPTURE(s);
      CHECK(r.problem.a.norm() == 0.0);
      SolveReport rep = solve(r.problem);
      CHECK(rep.status == SolveStatus::GlobalCertified);
    }
  }
}

TEST_CASE("generation is deterministic") {
  auto bitwise_equal = [](const GenResult& x, const GenResult& y) {
    return x.problem.A.mat() == y.problem.A.mat() &&
           x.problem.a == y.problem.a &&
           x.problem.B.mat() == y.problem.B.mat() &&
           x.problem.c == y.problem.c &&
           x.problem.delta1 == y.problem.delta1 &&
           x.problem.delta2 == y.problem.delta2;
  };
  GenSpec spec;
  spec.n = 10;
  spec.cls = GenClass::LngmEngineered;
  spec.seed = 7;
  CHECK(bitwise_equal(generate(spec), generate(spec)));
  spec.density = 0.1;
  spec.n = 50;
  spec.cls = GenClass::Homogeneous;
  CHECK(bitwise_equal(generate(spec), generate(spec)));
  spec.seed = 8;
  CHECK_FALSE(bitwise_equal(generate(spec), generate({spec.n, spec.density,
                                                      spec.cls, 7})));
}

TEST_CASE("sparse draws hit the requested density") {
  for (double d : {0.1, 0.01}) {
    GenSpec spec;
    spec.n = 300;
    spec.density = d;
    spec.cls = GenClass::Homogeneous;
    spec.seed = 11;
    GenResult r = generate(spec);
    const Mat& A = r.problem.A.mat();
    double nnz = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        if (A(i, j) != 0.0) ++nnz;
      }
    }
    double frac = nnz / double(A.size());
    CAPTURE(d);
    CHECK(frac >= 0.8 * d);
    CHECK(frac <= 1.2 * d);
  }
}

TEST_CASE("worked examples carry their known solutions") {
  auto ex = worked_examples();
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].problem.A(0, 0) == -8.0);
  CHECK(ex[0].scalars.at("objective") == -4.0);
  CHECK(ex[0].points.count("x_opt_plus") == 1);
  CHECK(ex[0].points.count("x_attractor") == 1);
  CHECK(ex[1].scalars.at("objective") ==
        doctest::Approx(-3.8964).epsilon(1e-4));
  CHECK(ex[1].points.count("x_stationary_3") == 1);
  CHECK(ex[1].problem.objective(ex[1].points.at("x_opt")) ==
        doctest::Approx(ex[1].scalars.at("objective")).epsilon(1e-12));
  GenSpec spec;
  spec.cls = GenClass::Example1;
  CHECK(generate(spec).problem.A.mat() == ex[0].problem.A.mat());
}

TEST_CASE("instance names and class parsing") {
  GenSpec spec;
  spec.n = 50;
  spec.density = 0.1;
  spec.cls = GenClass::Homogeneous;
  spec.seed = 7;
  CHECK(instance_name(spec, 3) == "homogeneous_n50_d0.1_s10");
  spec.density = 1.0;
  spec.cls = GenClass::LngmEngineered;
  CHECK(instance_name(spec) == "lngm_engineered_n50_d1_s7");
  CHECK(parse_gen_class("lngm_engineered") == GenClass::LngmEngineered);
  CHECK(parse_gen_class("NoLngmOrthogonal") == GenClass::NoLngmOrthogonal);
  CHECK(parse_gen_class("homogeneous") == GenClass::Homogeneous);
  CHECK_FALSE(parse_gen_class("bogus").has_value());
}

TEST_CASE("2-D oracle") {
  auto ex = worked_examples();
  SUBCASE("example 1 value") {
    OracleResult o = oracle_2d(ex[0].problem, 2000);
    CHECK(o.objective == doctest::Approx(-4.0).epsilon(1e-3));
    CHECK(ex[0].problem.is_feasible(o.x, 1e-8));
  }
  SUBCASE("example 2 value") {
    OracleResult o = oracle_2d(ex[1].problem, 800);
    CHECK(o.objective ==
          doctest::Approx(ex[1].scalars.at("objective")).epsilon(1e-3));
  }
  SUBCASE("convex instance matches the interior optimum") {
    Vec a(2);
    a << 1, 1;
    TtrsProblem p(SymMatrix::identity(2), a, SymMatrix::identity(2),
                  Vec::Zero(2), 10.0, 10.0);
    OracleResult o = oracle_2d(p, 400);
    CHECK(o.objective == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK((o.x - Vec(-a)).norm() <= 1e-6);
  }
  SUBCASE("shrunken ball radius collapses to the origin") {
    Vec a(2);
    a << 1, 1;
    TtrsProblem p(SymMatrix::identity(2), a, SymMatrix::identity(2),
                  Vec::Zero(2), 1e-6, 1.0);
    OracleResult o = oracle_2d(p, 100);
    CHECK(std::abs(o.objective) <= 1e-5);
    CHECK(o.x.norm() <= 1e-6 * (1.0 + 1e-8));
  }
  SUBCASE("disjoint constraints raise") {
    Vec c(2);
    c << 5, 0;
    TtrsProblem p(SymMatrix::identity(2), Vec::Zero(2), SymMatrix::identity(2),
                  c, 1.0, 1.0);
    CHECK_THROWS_AS(oracle_2d(p, 200), EmptyFeasibleSample);
  }
  SUBCASE("dimension guard") {
    TtrsProblem p(SymMatrix::identity(3), Vec::Zero(3), SymMatrix::identity(3),
                  Vec::Zero(3), 1.0, 1.0);
    CHECK_THROWS_AS(oracle_2d(p, 100), std::invalid_argument);
  }
}

TEST_CASE("generate validates its spec") {
  GenSpec spec;
  spec.n = 1;
  CHECK_THROWS_AS(generate(spec), GenError);
  spec.n = 5;
  spec.density = 0.0;
  CHECK_THROWS_AS(generate(spec), GenError);
  spec.density = 1.5;
  CHECK_THROWS_AS(generate(spec), GenError);
}
