#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttrs/hybrid.hpp"

namespace ttrs {

struct GenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyFeasibleSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Instance families. LngmEngineered plants a local non-global minimizer with
// known multiplier; the two NoLngm classes destroy it (eigenvalue multiplicity
// or exact orthogonality of the linear term); Homogeneous sets a=0, c=0;
// Example1/Example2 are the fixed 2-D reference instances.
enum class GenClass {
  LngmEngineered,
  NoLngmMultiplicity,
  NoLngmOrthogonal,
  Homogeneous,
  Example1,
  Example2,
};

std::string to_string(GenClass cls);
// Lowercase snake_case form used in file names.
std::string class_slug(GenClass cls);
// Accepts either the snake_case slug or the enum spelling.
std::optional<GenClass> parse_gen_class(std::string_view text);

struct GenSpec {
  int n = 10;
  double density = 1.0;
  GenClass cls = GenClass::LngmEngineered;
  std::uint64_t seed = 0;
};

// Generated problem plus ground-truth annotations where the construction
// knows them: engineered stationary points in `points`, multipliers and
// spectral data in `scalars`.
struct GenResult {
  TtrsProblem problem;
  std::map<std::string, double> scalars;
  std::map<std::string, Vec> points;
};

// Deterministic: identical specs produce bitwise-identical problems.
GenResult generate(const GenSpec& spec);

// The two fixed 2-D instances with their known optima and stationary sets.
std::vector<GenResult> worked_examples();

// `<class>_n<n>_d<density>_s<seed+index>`.
std::string instance_name(const GenSpec& spec, int index = 0);

struct OracleResult {
  Vec x;
  double objective;
};

// Brute-force 2-D reference: rejection sampling over the bounding box of the
// ball at grid^2 points, then projected-gradient polish from the best few
// feasible samples. Throws EmptyFeasibleSample when no sample is feasible.
OracleResult oracle_2d(const TtrsProblem& p, int grid = 400);

}  // namespace ttrs
