#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ttrs/bench.hpp"
#include "ttrs/gen.hpp"
#include "ttrs/problem_io.hpp"

using namespace ttrs;
namespace fs = std::filesystem;

namespace {

constexpr const char* kHeader =
    "name,n,den,cpu,kkt,obj,l1,l4,opt2active,opt_lngm1,opt_lngm4,"
    "opt_source,status";

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::size_t count_fields(const std::string& row) {
  return std::size_t(std::count(row.begin(), row.end(), ',')) + 1;
}

// Builds a mixed directory: 8 dense class-2 at n=6, 3 sparse class-4 at
// n=12, one infeasible instance, one malformed file. Returns sorted paths.
std::vector<std::string> build_corpus(const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    GenSpec spec;
    spec.n = 6;
    spec.cls = GenClass::LngmEngineered;
    spec.seed = seed;
    const fs::path path = dir / (instance_name(spec) + ".ttrs");
    std::ofstream out(path, std::ios::binary);
    serialize_problem(generate(spec).problem, out);
    files.push_back(path.string());
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    GenSpec spec;
    spec.n = 12;
    spec.density = 0.1;
    spec.cls = GenClass::Homogeneous;
    spec.seed = seed;
    const fs::path path = dir / (instance_name(spec) + ".ttrs");
    std::ofstream out(path, std::ios::binary);
    serialize_problem(generate(spec).problem, out);
    files.push_back(path.string());
  }
  {
    Vec a = Vec::Zero(2), c(2);
    c << 10.0, 0.0;
    TtrsProblem p(SymMatrix::identity(2), a, SymMatrix::identity(2), c, 1.0,
                  0.5);
    const fs::path path = dir / "disjoint_n2.ttrs";
    std::ofstream out(path, std::ios::binary);
    serialize_problem(p, out);
    files.push_back(path.string());
  }
  {
    const fs::path path = dir / "broken.ttrs";
    std::ofstream out(path, std::ios::binary);
    out << "ttrs 1\nn 2\ndelta1 oops\nend\n";
    files.push_back(path.string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

TEST_CASE("empty input produces the bare header") {
  std::ostringstream out;
  write_bench_csv(out, {});
  CHECK(out.str() == std::string(kHeader) + "\n");
}

TEST_CASE("bench_threads honors TTRS_THREADS") {
  setenv("TTRS_THREADS", "5", 1);
  CHECK(bench_threads() == 5);
  setenv("TTRS_THREADS", "0", 1);
  CHECK(bench_threads() >= 1);
  setenv("TTRS_THREADS", "zebra", 1);
  CHECK(bench_threads() >= 1);
  unsetenv("TTRS_THREADS");
  CHECK(bench_threads() >= 1);
}

TEST_CASE("mixed directory: schema, tallies, failures, determinism") {
  const fs::path dir = "bench_tmp_corpus";
  const std::vector<std::string> files = build_corpus(dir);

  setenv("TTRS_THREADS", "1", 1);
  const std::vector<BenchRecord> rows = run_bench(files);
  REQUIRE(rows.size() == files.size());

  std::ostringstream out;
  write_bench_csv(out, rows);
  const std::vector<std::string> lines = split_lines(out.str());
  REQUIRE(lines.size() >= rows.size() + 1);
  CHECK(lines[0] == kHeader);

  int broken_rows = 0, infeasible_rows = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string& row = lines[1 + i];
    CHECK(count_fields(row) == 13);
    if (row.substr(0, 6) == "broken") {
      ++broken_rows;
      CHECK(row.find("Error: ") != std::string::npos);
      CHECK(row.find('\n') == std::string::npos);
    }
    if (row.find(",Infeasible") != std::string::npos) {
      ++infeasible_rows;
      // Numeric result columns stay empty on unsolved rows.
      CHECK(row.find(",,,,,,,,") != std::string::npos);
    }
  }
  CHECK(broken_rows == 1);
  CHECK(infeasible_rows == 1);

  // Class-2 construction plants a TTRS-feasible LNGM of the ellipsoid TRS
  // in every instance; the homogeneous class never has one.
  std::string n6_summary, n12_summary;
  for (const std::string& line : lines) {
    if (line.rfind("# n=6 ", 0) == 0) n6_summary = line;
    if (line.rfind("# n=12 ", 0) == 0) n12_summary = line;
  }
  REQUIRE(!n6_summary.empty());
  REQUIRE(!n12_summary.empty());
  CHECK(n6_summary.find(" count=8 ") != std::string::npos);
  CHECK(n6_summary.find(" solved=8 ") != std::string::npos);
  CHECK(n6_summary.find(" L4=8 ") != std::string::npos);
  CHECK(n12_summary.find(" count=3 ") != std::string::npos);
  CHECK(n12_summary.find(" L1=0 ") != std::string::npos);
  CHECK(n12_summary.find(" L4=0 ") != std::string::npos);

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].name.rfind("homogeneous_", 0) == 0) {
      CHECK(rows[i].status == "GlobalCertified");
    }
    if (rows[i].name.rfind("lngm_engineered_", 0) == 0) {
      CHECK(rows[i].lngm4_feasible);
      CHECK(rows[i].has_best);
      CHECK(rows[i].kkt <= 1e-6);
    }
  }

  // Same files, same config: numeric columns reproduce bit for bit, on one
  // thread or several (CPU column exempt).
  auto fingerprint = [](const std::vector<BenchRecord>& rs) {
    std::ostringstream s;
    for (const BenchRecord& r : rs) {
      s << r.name << '|' << r.n << '|' << r.has_best << '|';
      if (r.has_best) {
        s.precision(17);
        s << r.kkt << '|' << r.objective << '|' << r.opt_source << '|';
      }
      s << r.lngm1_feasible << r.lngm4_feasible << r.opt_two_active
        << r.opt_at_lngm1 << r.opt_at_lngm4 << '|' << r.status << '\n';
    }
    return s.str();
  };
  const std::string serial = fingerprint(rows);
  CHECK(fingerprint(run_bench(files)) == serial);
  setenv("TTRS_THREADS", "3", 1);
  CHECK(fingerprint(run_bench(files)) == serial);
  unsetenv("TTRS_THREADS");

  fs::remove_all(dir);
}
