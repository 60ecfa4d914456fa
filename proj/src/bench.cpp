#include "ttrs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <thread>

#include "ttrs/problem_io.hpp"

namespace ttrs {

namespace {

std::string file_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name.resize(dot);
  return name;
}

std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool near_point(const Vec& x, const Vec& y) {
  return (x - y).norm() <= 1e-4 * (1.0 + y.norm());
}

}  // namespace

int bench_threads() {
  if (const char* env = std::getenv("TTRS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      return int(std::min(v, 64L));
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return int(std::clamp(hw, 1u, 16u));
}

BenchRecord bench_one(const std::string& file, const HybridConfig& cfg) {
  BenchRecord rec;
  rec.name = file_stem(file);
  try {
    const TtrsProblem p = parse_problem_file(file);
    rec.n = int(p.n());
    Eigen::Index nnz = 0;
    for (Eigen::Index i = 0; i < p.A.n(); ++i) {
      for (Eigen::Index j = 0; j < p.A.n(); ++j) {
        if (p.A(i, j) != 0.0) ++nnz;
      }
    }
    rec.density = double(nnz) / (double(p.n()) * double(p.n()));

    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport rep = solve(p, cfg);
    rec.cpu_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rec.status = to_string(rep.status);
    for (const Candidate& cand : rep.pool.entries) {
      if (cand.source == CandidateSource::Lngm1 && cand.feasible) {
        rec.lngm1_feasible = true;
      }
      if (cand.source == CandidateSource::Lngm4 && cand.feasible) {
        rec.lngm4_feasible = true;
      }
    }
    if (rep.best) {
      rec.has_best = true;
      rec.objective = rep.best->objective;
      rec.kkt = rep.kkt ? rep.kkt->stationarity_residual : 0.0;
      rec.opt_source = to_string(rep.best->source);
      const Vec& x = rep.best->x;
      const double ball = x.squaredNorm() / (p.delta1 * p.delta1);
      const double ell = p.ellipsoid_value(x) / (p.delta2 * p.delta2);
      rec.opt_two_active = ball >= 1.0 - 1e-6 && ell >= 1.0 - 1e-6;
      for (const Candidate& cand : rep.pool.entries) {
        if (!cand.feasible) continue;
        if (cand.source == CandidateSource::Lngm1 && near_point(x, cand.x)) {
          rec.opt_at_lngm1 = true;
        }
        if (cand.source == CandidateSource::Lngm4 && near_point(x, cand.x)) {
          rec.opt_at_lngm4 = true;
        }
      }
    }
  } catch (const std::exception& e) {
    rec.status = std::string("Error: ") + e.what();
  }
  return rec;
}

std::vector<BenchRecord> run_bench(const std::vector<std::string>& files,
                                   const HybridConfig& cfg) {
  std::vector<BenchRecord> records(files.size());
  const int workers =
      int(std::min<std::size_t>(std::size_t(bench_threads()), files.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) {
      records[i] = bench_one(files[i], cfg);
    }
    return records;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      records[i] = bench_one(files[i], cfg);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows) {
  out << "name,n,den,cpu,kkt,obj,l1,l4,opt2active,opt_lngm1,opt_lngm4,"
         "opt_source,status\n";
  for (const BenchRecord& r : rows) {
    out << csv_safe(r.name) << ',' << r.n << ',' << format_g(r.density) << ','
        << format_g(r.cpu_seconds) << ',';
    if (r.has_best) {
      out << format_g(r.kkt) << ',' << format_g(r.objective) << ','
          << int(r.lngm1_feasible) << ',' << int(r.lngm4_feasible) << ','
          << int(r.opt_two_active) << ',' << int(r.opt_at_lngm1) << ','
          << int(r.opt_at_lngm4) << ',' << csv_safe(r.opt_source);
    } else {
      out << ",,,,,,,";
    }
    out << ',' << csv_safe(r.status) << '\n';
  }

  struct Tally {
    int count = 0;
    int solved = 0;
    double obj = 0.0, cpu = 0.0, kkt = 0.0;
    int l1 = 0, l4 = 0, two_active = 0, opt_l1 = 0, opt_l4 = 0;
  };
  std::map<int, Tally> by_n;
  for (const BenchRecord& r : rows) {
    Tally& t = by_n[r.n];
    ++t.count;
    if (!r.has_best) continue;
    ++t.solved;
    t.obj += r.objective;
    t.cpu += r.cpu_seconds;
    t.kkt += r.kkt;
    t.l1 += r.lngm1_feasible;
    t.l4 += r.lngm4_feasible;
    t.two_active += r.opt_two_active;
    t.opt_l1 += r.opt_at_lngm1;
    t.opt_l4 += r.opt_at_lngm4;
  }
  for (const auto& [n, t] : by_n) {
    out << "# n=" << n << " count=" << t.count << " solved=" << t.solved;
    if (t.solved > 0) {
      out << " avg_obj=" << format_g(t.obj / t.solved)
          << " avg_cpu=" << format_g(t.cpu / t.solved)
          << " avg_kkt=" << format_g(t.kkt / t.solved);
    }
    out << " L1=" << t.l1 << " L4=" << t.l4 << " opt_2active=" << t.two_active
        << " opt_lngm1=" << t.opt_l1 << " opt_lngm4=" << t.opt_l4 << '\n';
  }
}

}  // namespace ttrs
