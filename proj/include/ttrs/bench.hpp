#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ttrs/hybrid.hpp"

namespace ttrs {

// One solved problem file. Numeric fields are valid only where noted; the
// `status` column always tells the truth (solver status, Infeasible, or
// Error: <reason> when the file failed to parse or the solver threw).
struct BenchRecord {
  std::string name;   // file name without directory or extension
  int n = 0;
  double density = 0.0;  // structural nonzero fraction of A
  double cpu_seconds = 0.0;
  bool has_best = false;
  double kkt = 0.0;        // stationarity residual at the returned point
  double objective = 0.0;  // valid when has_best
  bool lngm1_feasible = false;
  bool lngm4_feasible = false;
  bool opt_two_active = false;  // both constraints active at the best point
  bool opt_at_lngm1 = false;    // best point coincides with the (1a) LNGM
  bool opt_at_lngm4 = false;
  std::string opt_source;  // candidate source of the best entry
  std::string status;
};

// Number of worker threads: TTRS_THREADS when set to a positive integer,
// otherwise the hardware concurrency clamped to [1, 16].
int bench_threads();

// Solves every file (any readable problem document) with the same config.
// Results are indexed like `files`; failures never abort the batch. Runs on
// bench_threads() workers; records do not depend on the thread count.
std::vector<BenchRecord> run_bench(const std::vector<std::string>& files,
                                   const HybridConfig& cfg = {});

BenchRecord bench_one(const std::string& file, const HybridConfig& cfg = {});

// Fixed-schema CSV:
//   name,n,den,cpu,kkt,obj,l1,l4,opt2active,opt_lngm1,opt_lngm4,opt_source,status
// followed by one '#'-prefixed summary line per dimension (ascending n):
// instance counts, averages of obj/cpu/kkt over solved rows, and the
// L(1a)/L(4)/2-active/optimum-at-LNGM tallies.
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& rows);

}  // namespace ttrs
