#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ttrs/gen.hpp"
#include "ttrs/problem_io.hpp"

using namespace ttrs;

namespace {

bool same_matrix(const Mat& x, const Mat& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         (x.array() == y.array()).all();
}

bool same_problem(const TtrsProblem& x, const TtrsProblem& y) {
  return same_matrix(x.A.mat(), y.A.mat()) &&
         same_matrix(x.B.mat(), y.B.mat()) &&
         (x.a.array() == y.a.array()).all() &&
         (x.c.array() == y.c.array()).all() && x.delta1 == y.delta1 &&
         x.delta2 == y.delta2;
}

}  // namespace

TEST_CASE("dense round-trip is bit-exact") {
  for (const GenResult& ex : worked_examples()) {
    const TtrsProblem q = parse_problem(serialize_problem(ex.problem));
    CHECK(same_problem(ex.problem, q));
  }
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    GenSpec spec;
    spec.n = 7;
    spec.cls = GenClass::LngmEngineered;
    spec.seed = seed;
    const TtrsProblem p = generate(spec).problem;
    const TtrsProblem q = parse_problem(serialize_problem(p));
    CHECK(same_problem(p, q));
    // Second generation differs from the first (sanity of the comparator).
    spec.seed = seed + 100;
    CHECK_FALSE(same_problem(generate(spec).problem, q));
  }
}

TEST_CASE("sparse round-trip reproduces the matrices exactly") {
  for (std::uint64_t seed : {11, 12, 13}) {
    GenSpec spec;
    spec.n = 40;
    spec.density = 0.1;
    spec.cls = GenClass::Homogeneous;
    spec.seed = seed;
    const TtrsProblem p = generate(spec).problem;
    const std::string text = serialize_problem(p);
    CHECK(text.find("A sparse ") != std::string::npos);
    const TtrsProblem q = parse_problem(text);
    CHECK(same_problem(p, q));
    // Serialization is deterministic, so a re-dump is byte-identical.
    CHECK(serialize_problem(q) == text);
  }
}

TEST_CASE("serialized form golden") {
  const TtrsProblem p = worked_examples()[0].problem;
  const std::string expected =
      "ttrs 1\n"
      "n 2\n"
      "convention half\n"
      "delta1 1\n"
      "delta2 1.4142135623730951\n"
      "A dense\n"
      "-8 2\n"
      "2 -4\n"
      "a 1 1\n"
      "B dense\n"
      "3 0\n"
      "0 1\n"
      "c 0 0\n"
      "end\n";
  CHECK(serialize_problem(p) == expected);
}

TEST_CASE("nohalf doubles the quadratic term on ingestion") {
  const std::string text =
      "ttrs 1\n"
      "n 2\n"
      "convention nohalf\n"
      "delta1 1\n"
      "delta2 1.4142135623730951\n"
      "A dense\n"
      "-4 1\n"
      "1 -2\n"
      "a 1 1\n"
      "B dense\n"
      "3 0\n"
      "0 1\n"
      "c 0 0\n"
      "end\n";
  const TtrsProblem q = parse_problem(text);
  CHECK(same_problem(worked_examples()[0].problem, q));

  SUBCASE("fallback convention applies only when the document is silent") {
    std::string silent = text;
    const auto pos = silent.find("convention nohalf\n");
    silent.erase(pos, std::string("convention nohalf\n").size());
    // Default fallback: half, so A stays as written.
    const TtrsProblem h = parse_problem(silent);
    CHECK(h.A(0, 0) == -4.0);
    // Explicit nohalf fallback doubles.
    const TtrsProblem d = parse_problem(silent, Convention::NoHalf);
    CHECK(same_problem(worked_examples()[0].problem, d));
    // A declared convention wins over the fallback.
    const TtrsProblem w = parse_problem(text, Convention::Half);
    CHECK(same_problem(worked_examples()[0].problem, w));
  }
}

TEST_CASE("comments, interleaved sections, and multi-line vectors parse") {
  const std::string text =
      "# leading comment\n"
      "ttrs 1  # version\n"
      "n 3\n"
      "delta2 2 delta1 0.5\n"
      "c 0.25\n"
      "  -0.5 # mid-vector comment\n"
      "  0\n"
      "B sparse 4\n"
      "0 0 2 1 1 3\n"
      "2 2 4 0 2 0.125\n"
      "a 1 2 3\n"
      "A sparse 2\n"
      "0 1 -7\n"
      "1 2 5\n"
      "end\n";
  const TtrsProblem p = parse_problem(text);
  CHECK(p.n() == 3);
  CHECK(p.delta1 == 0.5);
  CHECK(p.delta2 == 2.0);
  CHECK(p.c(1) == -0.5);
  CHECK(p.A(0, 1) == -7.0);
  CHECK(p.A(1, 0) == -7.0);
  CHECK(p.A(0, 0) == 0.0);
  CHECK(p.B(0, 2) == 0.125);
  CHECK(p.B(2, 0) == 0.125);
  CHECK(p.B(1, 1) == 3.0);
}

TEST_CASE("parse_problem_file reads what serialize wrote") {
  GenSpec spec;
  spec.n = 5;
  spec.cls = GenClass::Homogeneous;
  spec.seed = 77;
  const TtrsProblem p = generate(spec).problem;
  const std::string path = "io_roundtrip_tmp.ttrs";
  {
    std::ofstream out(path, std::ios::binary);
    serialize_problem(p, out);
  }
  const TtrsProblem q = parse_problem_file(path);
  CHECK(same_problem(p, q));
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_problem_file(path), ParseError);
}

TEST_CASE("diagnostics carry position and message") {
  auto expect_error = [](const std::string& text, int line,
                         const char* fragment) {
    try {
      parse_problem(text);
      FAIL_CHECK("expected ParseError for: " << fragment);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };

  expect_error("nonsense 1\nend\n", 1, "must start with `ttrs 1`");
  expect_error("ttrs 2\nend\n", 1, "unsupported format version");
  expect_error("ttrs 1\nbogus 3\nend\n", 2, "unknown statement");
  expect_error("ttrs 1\na 1 2\nend\n", 2, "requires `n` to appear first");
  expect_error("ttrs 1\nn 2\nn 3\nend\n", 3, "duplicate `n`");
  expect_error("ttrs 1\nn 2\ndelta1 x\nend\n", 3, "expected delta1 value");
  expect_error("ttrs 1\nn 2\ndelta1 -1\nend\n", 3, "delta1 must be positive");
  expect_error("ttrs 1\nn 2\nconvention both\nend\n", 3,
               "must be `half` or `nohalf`");
  expect_error("ttrs 1\nn 2\nA diag\nend\n", 3,
               "layout must be `dense` or `sparse`");
  expect_error("ttrs 1\nn 2\nA dense\n1 2 3\nend\n", 5,
               "expected entry (1,1)");
  expect_error("ttrs 1\nn 2\nA sparse 1\n1 0 5\nend\n", 4, "i <= j");
  expect_error("ttrs 1\nn 2\nA sparse 2\n0 1 5\n0 1 6\nend\n", 5,
               "duplicate sparse entry");
  expect_error("ttrs 1\nn 2\nA sparse 1\n0 3 5\nend\n", 4,
               "outside [0,1]");
  expect_error("ttrs 1\nn 2\nend\n", 3, "without a `A` section");
  expect_error(
      "ttrs 1\nn 2\ndelta1 1\ndelta2 1\na 0 0\nc 0 0\n"
      "A dense\n0 1\n2 0\nB dense\n1 0\n0 1\nend\n",
      7, "not symmetric");
  expect_error("ttrs 1\nn 2\ndelta1 1\ndelta2 1\na 0 0\nc 0 0\n"
               "A dense\n0 1\n1 0\nB dense\n1 0\n0 1\nend\ntrailing\n",
               14, "unexpected content after `end`");

  try {
    parse_problem("ttrs 1\nn 2\n   A dense\n1 2\n2 oops\nend\n");
    FAIL_CHECK("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
    CHECK(e.col() == 3);
  }
}
