#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ttrs/gen.hpp"
#include "ttrs/problem_io.hpp"

using namespace ttrs;
namespace fs = std::filesystem;
using nlohmann::json;

#ifndef TTRS_CLI_PATH
#error "TTRS_CLI_PATH must point at the built CLI binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::absolute("cli_out_" + std::to_string(counter) +
                                    ".txt");
  const fs::path err = fs::absolute("cli_err_" + std::to_string(counter) +
                                    ".txt");
  ++counter;
  const std::string command = std::string("\"") + TTRS_CLI_PATH + "\" " +
                              args + " > " + out.string() + " 2> " +
                              err.string();
  const int raw = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

// Scratch directory per test case, removed on destruction.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::absolute(name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& leaf) const {
    return (dir / leaf).string();
  }
};

void write_example1(const std::string& path) {
  const TtrsProblem p = worked_examples()[0].problem;
  std::ofstream out(path, std::ios::binary);
  serialize_problem(p, out);
}

}  // namespace

TEST_CASE("solve: JSON report, objective, exit codes") {
  Scratch s("cli_tmp_solve");
  write_example1(s / "ex1.ttrs");

  const RunResult r = run_cli("solve " + (s / "ex1.ttrs"));
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["best"]["objective"].get<double>() == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(std::abs(j["best"]["x"][0].get<double>()) ==
        doctest::Approx(0.70710678).epsilon(1e-6));
  CHECK(j["status"] == "StationaryPoint");
  CHECK(j["pool"].is_array());
  CHECK(j["trace"].is_array());
  CHECK(j["trace"].size() > 1);
  CHECK(j.contains("timings"));

  SUBCASE("csv format") {
    const RunResult c = run_cli("solve " + (s / "ex1.ttrs") + " --format csv");
    CHECK(c.exit_code == 0);
    CHECK(c.out.rfind("name,n,den,cpu,kkt,obj,", 0) == 0);
    CHECK(c.out.find(",-4,") != std::string::npos);
  }

  SUBCASE("infeasible exits 2") {
    Vec a = Vec::Zero(2), c(2);
    c << 9.0, 0.0;
    TtrsProblem disjoint(SymMatrix::identity(2), a, SymMatrix::identity(2), c,
                         1.0, 0.5);
    std::ofstream out(s / "disjoint.ttrs", std::ios::binary);
    serialize_problem(disjoint, out);
    out.close();
    const RunResult d = run_cli("solve " + (s / "disjoint.ttrs"));
    CHECK(d.exit_code == 2);
    CHECK(json::parse(d.out)["status"] == "Infeasible");
  }

  SUBCASE("malformed file exits 1 with line diagnostics") {
    std::ofstream out(s / "broken.ttrs", std::ios::binary);
    out << "ttrs 1\nn 2\ndelta1 oops\nend\n";
    out.close();
    const RunResult b = run_cli("solve " + (s / "broken.ttrs"));
    CHECK(b.exit_code == 1);
    CHECK(b.err.find("line 3") != std::string::npos);
    CHECK(run_cli("solve " + (s / "missing.ttrs")).exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
  }

  SUBCASE("nohalf convention flag doubles A for undeclared files") {
    std::ofstream out(s / "undeclared.ttrs", std::ios::binary);
    out << "ttrs 1\nn 2\ndelta1 1\ndelta2 1.4142135623730951\n"
           "A dense\n-4 1\n1 -2\na 1 1\nB dense\n3 0\n0 1\nc 0 0\nend\n";
    out.close();
    const RunResult h = run_cli("solve " + (s / "undeclared.ttrs") +
                                " --convention nohalf");
    CHECK(h.exit_code == 0);
    CHECK(json::parse(h.out)["best"]["objective"].get<double>() ==
          doctest::Approx(-4.0).epsilon(1e-9));
  }
}

TEST_CASE("config file feeds solver options and flags win over it") {
  Scratch s("cli_tmp_config");
  write_example1(s / "ex1.ttrs");
  {
    std::ofstream ini(s / "solver.ini", std::ios::binary);
    ini << "[solve]\ntol=-5\n";
  }
  const RunResult bad =
      run_cli("solve " + (s / "ex1.ttrs") + " --config " + (s / "solver.ini"));
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("tol") != std::string::npos);
  const RunResult good = run_cli("solve " + (s / "ex1.ttrs") + " --config " +
                                 (s / "solver.ini") + " --tol 1e-7");
  CHECK(good.exit_code == 0);
}

TEST_CASE("gen: deterministic files with annotation sidecars") {
  Scratch s("cli_tmp_gen");
  const RunResult r1 = run_cli("gen --class class2 --n 5 --seed 3 --count 3 "
                               "--outdir " +
                               (s / "a"));
  CHECK(r1.exit_code == 0);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(s / "a")) {
    names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  const std::vector<std::string> expected = {
      "lngm_engineered_n5_d1_s3.annot.json", "lngm_engineered_n5_d1_s3.ttrs",
      "lngm_engineered_n5_d1_s4.annot.json", "lngm_engineered_n5_d1_s4.ttrs",
      "lngm_engineered_n5_d1_s5.annot.json", "lngm_engineered_n5_d1_s5.ttrs"};
  CHECK(names == expected);

  // Annotations carry the planted structure.
  const json annot =
      json::parse(slurp(fs::path(s / "a") / "lngm_engineered_n5_d1_s3.annot.json"));
  CHECK(annot["spec"]["class"] == "lngm_engineered");
  CHECK(annot["points"].contains("x_lngm4"));
  CHECK(annot["scalars"].contains("lambda_star_4"));

  // Re-running with the same arguments reproduces every byte.
  const RunResult r2 = run_cli("gen --class class2 --n 5 --seed 3 --count 3 "
                               "--outdir " +
                               (s / "b"));
  CHECK(r2.exit_code == 0);
  for (const std::string& name : expected) {
    CHECK(slurp(fs::path(s / "a") / name) == slurp(fs::path(s / "b") / name));
  }

  SUBCASE("homogeneous instances have zero linear term and center") {
    const RunResult r = run_cli("gen --class class4 --n 6 --seed 1 --outdir " +
                                (s / "h"));
    CHECK(r.exit_code == 0);
    const TtrsProblem p =
        parse_problem_file((fs::path(s / "h") / "homogeneous_n6_d1_s1.ttrs")
                               .string());
    CHECK(p.a.norm() == 0.0);
    CHECK(p.c.norm() == 0.0);
  }

  SUBCASE("unknown class is rejected with guidance") {
    const RunResult r = run_cli("gen --class class9 --outdir " + (s / "x"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("unknown class") != std::string::npos);
    const RunResult c3 = run_cli("gen --class class3 --outdir " + (s / "x"));
    CHECK(c3.exit_code == 1);
    CHECK(c3.err.find("no_lngm_") != std::string::npos);
  }
}

TEST_CASE("bench: directory run with summary, empty dir header-only") {
  Scratch s("cli_tmp_bench");
  REQUIRE(run_cli("gen --class class2 --n 5 --seed 20 --count 4 --outdir " +
                  (s / "probs"))
              .exit_code == 0);
  const RunResult r = run_cli("bench " + (s / "probs") + " --out " +
                              (s / "out.csv"));
  CHECK(r.exit_code == 0);
  const std::string csv = slurp(s / "out.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "name,n,den,cpu,kkt,obj,l1,l4,opt2active,opt_lngm1,opt_lngm4,"
        "opt_source,status");
  int rows = 0, summaries = 0;
  std::string prev_name, line;
  bool sorted = true;
  while (std::getline(lines, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++summaries;
      continue;
    }
    const std::string name = line.substr(0, line.find(','));
    if (!prev_name.empty() && name < prev_name) sorted = false;
    prev_name = name;
    ++rows;
  }
  CHECK(rows == 4);
  CHECK(summaries == 1);
  CHECK(sorted);
  CHECK(csv.find(" L4=4 ") != std::string::npos);

  SUBCASE("empty directory") {
    fs::create_directories(s / "empty");
    const RunResult e = run_cli("bench " + (s / "empty"));
    CHECK(e.exit_code == 0);
    CHECK(e.out ==
          "name,n,den,cpu,kkt,obj,l1,l4,opt2active,opt_lngm1,opt_lngm4,"
          "opt_source,status\n");
  }

  SUBCASE("json format") {
    const RunResult jrun =
        run_cli("bench " + (s / "probs") + " --format json");
    CHECK(jrun.exit_code == 0);
    const json arr = json::parse(jrun.out);
    CHECK(arr.is_array());
    CHECK(arr.size() == 4);
    CHECK(arr[0].contains("kkt"));
  }
}

TEST_CASE("oracle: reference optimum and witness fallback") {
  Scratch s("cli_tmp_oracle");
  write_example1(s / "ex1.ttrs");
  const RunResult r = run_cli("oracle " + (s / "ex1.ttrs") + " --grid 800");
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["objective"].get<double>() == doctest::Approx(-4.0).epsilon(1e-3));

  SUBCASE("csv format") {
    const RunResult c = run_cli("oracle " + (s / "ex1.ttrs") +
                                " --grid 800 --format csv");
    CHECK(c.exit_code == 0);
    CHECK(c.out.rfind("x0,x1,objective\n", 0) == 0);
  }

  SUBCASE("sliver region falls back to the feasibility witness") {
    // Feasible set is a tiny disc that contains no grid cell midpoint.
    Vec a(2), c(2);
    a << 1.0, 0.0;
    c << 0.9999, 0.0;
    TtrsProblem p(SymMatrix::identity(2), a, SymMatrix::identity(2), c, 1.0,
                  1e-9);
    std::ofstream out(s / "sliver.ttrs", std::ios::binary);
    serialize_problem(p, out);
    out.close();
    const RunResult t = run_cli("oracle " + (s / "sliver.ttrs") + " --grid 4");
    CHECK(t.exit_code == 0);
    const json tj = json::parse(t.out);
    CHECK(tj.contains("fallback"));
    CHECK(tj["objective"].get<double>() ==
          doctest::Approx(p.objective(c)).epsilon(1e-6));
  }

  SUBCASE("non-2D input errors") {
    REQUIRE(run_cli("gen --class class2 --n 5 --seed 2 --outdir " + (s / "g"))
                .exit_code == 0);
    const RunResult n5 = run_cli(
        "oracle " + (fs::path(s / "g") / "lngm_engineered_n5_d1_s2.ttrs")
                        .string());
    CHECK(n5.exit_code == 1);
    CHECK(n5.err.find("2-D") != std::string::npos);
  }
}
