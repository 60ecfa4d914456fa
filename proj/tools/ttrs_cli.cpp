#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ttrs/bench.hpp"
#include "ttrs/gen.hpp"
#include "ttrs/hybrid.hpp"
#include "ttrs/problem_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ttrs;

namespace {

json to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const Candidate& c) {
  json j{{"x", to_json(c.x)},
         {"objective", c.objective},
         {"source", to_string(c.source)},
         {"feasible", c.feasible}};
  if (c.multipliers) {
    j["gamma"] = c.multipliers->first;
    j["mu"] = c.multipliers->second;
  }
  return j;
}

json report_to_json(const SolveReport& rep) {
  json j;
  j["status"] = to_string(rep.status);
  j["v_ch"] = rep.v_ch;
  j["admm_iterations"] = rep.admm_iterations;
  if (rep.witness) j["witness"] = to_json(*rep.witness);
  if (rep.best) j["best"] = to_json(*rep.best);
  if (rep.kkt) {
    j["kkt"] = {{"gamma", rep.kkt->gamma},
                {"mu", rep.kkt->mu},
                {"stationarity", rep.kkt->stationarity_residual},
                {"comp_ball", rep.kkt->comp_residuals.first},
                {"comp_ellipsoid", rep.kkt->comp_residuals.second},
                {"h_min_eigenvalue", rep.kkt->h_min_eigenvalue},
                {"curvature", to_string(rep.kkt->curvature_class)}};
  }
  json pool = json::array();
  for (const Candidate& c : rep.pool.entries) pool.push_back(to_json(c));
  j["pool"] = pool;
  json trace = json::array();
  for (const TraceRecord& t : rep.trace) {
    trace.push_back({{"k", t.k},
                     {"primal_residual", t.primal_residual},
                     {"objective", t.objective},
                     {"lagrangian", t.lagrangian},
                     {"descent_lhs", t.descent_lhs},
                     {"descent_rhs", t.descent_rhs}});
  }
  j["trace"] = trace;
  j["timings"] = {{"feasibility", rep.timings.feasibility},
                  {"screening", rep.timings.screening},
                  {"lngm", rep.timings.lngm},
                  {"admm", rep.timings.admm},
                  {"refine", rep.timings.refine},
                  {"total", rep.timings.total}};
  return j;
}

// Shared solver flags; `present` checks keep preset/built-in defaults in
// force unless the command line or config file actually set a value.
struct SolverFlags {
  double tol = 1e-7;
  int maxiter = 1000;
  std::string preset = "class2";
  double rho = 0.0;
  double tau = 0.9;
  std::string convention = "half";
  std::string format;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--tol", f.tol, "KKT tolerance (default 1e-7)");
  cmd->add_option("--maxiter", f.maxiter,
                  "ADMM iteration cap per run (default 1000)");
  cmd->add_option("--preset", f.preset,
                  "Parameter preset keyed to instance family")
      ->check(CLI::IsMember({"class2", "class3", "class4"}));
  cmd->add_option("--rho", f.rho, "Penalty parameter (preset formula if unset)");
  cmd->add_option("--tau", f.tau, "Dual step scaling in (0,1)");
  cmd->add_option("--convention", f.convention,
                  "Objective convention for files lacking a `convention` line")
      ->check(CLI::IsMember({"half", "nohalf"}));
}

HybridConfig make_config(const CLI::App* cmd, const SolverFlags& f) {
  HybridConfig cfg;
  if (f.preset == "class3") {
    cfg.preset = Preset::NoLngm;
  } else if (f.preset == "class4") {
    cfg.preset = Preset::Homogeneous;
  } else {
    cfg.preset = Preset::LngmRich;
  }
  if (cmd->count("--tol")) cfg.tol = f.tol;
  if (cmd->count("--maxiter")) cfg.max_iter = f.maxiter;
  if (cmd->count("--rho")) cfg.rho = f.rho;
  if (cmd->count("--tau")) cfg.tau = f.tau;
  return cfg;
}

Convention fallback_convention(const SolverFlags& f) {
  return f.convention == "nohalf" ? Convention::NoHalf : Convention::Half;
}

int exit_code_for(const std::string& status) {
  if (status == "Infeasible") return 2;
  if (status.rfind("Error", 0) == 0) return 1;
  return 0;
}

int cmd_solve(const CLI::App* cmd, const SolverFlags& flags,
              const std::string& path) {
  if (flags.format == "csv") {
    const BenchRecord rec = bench_one(path, make_config(cmd, flags));
    write_bench_csv(std::cout, {rec});
    return exit_code_for(rec.status);
  }
  TtrsProblem p = parse_problem_file(path, fallback_convention(flags));
  const SolveReport rep = solve(p, make_config(cmd, flags));
  std::cout << report_to_json(rep).dump(2) << '\n';
  return rep.status == SolveStatus::Infeasible ? 2 : 0;
}

int cmd_gen(const std::string& cls_text, int n, double density,
            std::uint64_t seed, int count, const std::string& outdir) {
  std::optional<GenClass> cls = parse_gen_class(cls_text);
  if (!cls && cls_text == "class2") cls = GenClass::LngmEngineered;
  if (!cls && cls_text == "class4") cls = GenClass::Homogeneous;
  if (!cls) {
    std::cerr << "error: unknown class `" << cls_text
              << "` (use lngm_engineered, no_lngm_multiplicity, "
                 "no_lngm_orthogonal, homogeneous, example1, example2; "
                 "class2/class4 are aliases; class3 needs an explicit "
                 "no_lngm_* method)\n";
    return 1;
  }
  if (*cls == GenClass::Example1 || *cls == GenClass::Example2) {
    n = 2;
    density = 1.0;
  }
  fs::create_directories(outdir);
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    GenSpec spec;
    spec.n = n;
    spec.density = density;
    spec.cls = *cls;
    spec.seed = seed + std::uint64_t(i);
    const std::string name = instance_name(spec);
    try {
      const GenResult r = generate(spec);
      {
        std::ofstream out(fs::path(outdir) / (name + ".ttrs"),
                          std::ios::binary);
        serialize_problem(r.problem, out);
      }
      json annot;
      annot["spec"] = {{"class", class_slug(spec.cls)},
                       {"n", spec.n},
                       {"density", spec.density},
                       {"seed", spec.seed}};
      annot["scalars"] = json::object();
      for (const auto& [key, value] : r.scalars) annot["scalars"][key] = value;
      annot["points"] = json::object();
      for (const auto& [key, value] : r.points) {
        annot["points"][key] = to_json(value);
      }
      std::ofstream out(fs::path(outdir) / (name + ".annot.json"),
                        std::ios::binary);
      out << annot.dump(2) << '\n';
    } catch (const GenError& e) {
      ++failures;
      std::cerr << "error: " << name << ": " << e.what() << '\n';
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_bench(const CLI::App* cmd, const SolverFlags& flags,
              const std::string& dir, const std::string& out_path) {
  std::vector<std::string> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ttrs") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  const std::vector<BenchRecord> records =
      run_bench(files, make_config(cmd, flags));

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file_out.open(out_path, std::ios::binary);
    if (!file_out) {
      std::cerr << "error: cannot open `" << out_path << "` for writing\n";
      return 1;
    }
    out = &file_out;
  }
  if (flags.format == "json") {
    json arr = json::array();
    for (const BenchRecord& r : records) {
      json row{{"name", r.name},       {"n", r.n},
               {"den", r.density},     {"cpu", r.cpu_seconds},
               {"status", r.status},   {"l1", r.lngm1_feasible},
               {"l4", r.lngm4_feasible}};
      if (r.has_best) {
        row["kkt"] = r.kkt;
        row["obj"] = r.objective;
        row["opt_2active"] = r.opt_two_active;
        row["opt_lngm1"] = r.opt_at_lngm1;
        row["opt_lngm4"] = r.opt_at_lngm4;
        row["opt_source"] = r.opt_source;
      }
      arr.push_back(row);
    }
    *out << arr.dump(2) << '\n';
  } else {
    write_bench_csv(*out, records);
  }
  return 0;
}

int cmd_oracle(const SolverFlags& flags, const std::string& path, int grid) {
  const TtrsProblem p = parse_problem_file(path, fallback_convention(flags));
  json j;
  try {
    const OracleResult r = oracle_2d(p, grid);
    j["x"] = to_json(r.x);
    j["objective"] = r.objective;
  } catch (const EmptyFeasibleSample&) {
    const FeasibilityResult fr = check_feasibility(p);
    if (!fr.feasible || !fr.witness) {
      std::cerr << "error: problem is infeasible\n";
      return 2;
    }
    j["x"] = to_json(*fr.witness);
    j["objective"] = p.objective(*fr.witness);
    j["fallback"] = "feasibility-witness";
  }
  if (flags.format == "csv") {
    std::cout << "x0,x1,objective\n"
              << j["x"][0].dump() << ',' << j["x"][1].dump() << ','
              << j["objective"].dump() << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-trust-region subproblem solver"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "",
                 "INI config file; sections [solve]/[bench] hold the same "
                 "keys as the flags. Command-line flags win over the file.");

  SolverFlags solve_flags;
  std::string solve_path;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Solve a problem file, print a report");
  solve_cmd->add_option("file", solve_path, "Problem file")
      ->required()
      ->check(CLI::ExistingFile);
  add_solver_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--format", solve_flags.format, "json (default) | csv")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string gen_class = "class2", gen_outdir = ".";
  int gen_n = 10, gen_count = 1;
  double gen_density = 1.0;
  std::uint64_t gen_seed = 0;
  CLI::App* gen_cmd = app.add_subcommand(
      "gen", "Write problem files and ground-truth annotation sidecars");
  gen_cmd->add_option("--class", gen_class,
                      "Instance family (slug or class2/class4 alias)");
  gen_cmd->add_option("--n", gen_n, "Dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--density", gen_density,
                      "Structural density of A in (0,1]");
  gen_cmd->add_option("--seed", gen_seed, "Base seed; file i uses seed+i");
  gen_cmd->add_option("--count", gen_count, "Number of instances")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--outdir", gen_outdir, "Output directory");

  SolverFlags bench_flags;
  std::string bench_dir, bench_out;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "Solve every .ttrs file in a directory, emit table rows");
  bench_cmd->add_option("dir", bench_dir, "Directory of problem files")
      ->required()
      ->check(CLI::ExistingDirectory);
  add_solver_flags(bench_cmd, bench_flags);
  bench_cmd
      ->add_option("--format", bench_flags.format, "csv (default) | json")
      ->check(CLI::IsMember({"json", "csv"}));
  bench_cmd->add_option("--out", bench_out, "Output path (default stdout)");

  SolverFlags oracle_flags;
  std::string oracle_path;
  int oracle_grid = 400;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Brute-force reference optimum for a 2-D problem file");
  oracle_cmd->add_option("file", oracle_path, "Problem file")
      ->required()
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--grid", oracle_grid, "Samples per axis")
      ->check(CLI::PositiveNumber);
  oracle_cmd
      ->add_option("--convention", oracle_flags.convention,
                   "Objective convention for files lacking a declaration")
      ->check(CLI::IsMember({"half", "nohalf"}));
  oracle_cmd
      ->add_option("--format", oracle_flags.format, "json (default) | csv")
      ->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve_cmd->parsed()) {
      return cmd_solve(solve_cmd, solve_flags, solve_path);
    }
    if (gen_cmd->parsed()) {
      return cmd_gen(gen_class, gen_n, gen_density, gen_seed, gen_count,
                     gen_outdir);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_cmd, bench_flags, bench_dir, bench_out);
    }
    if (oracle_cmd->parsed()) {
      return cmd_oracle(oracle_flags, oracle_path, oracle_grid);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
