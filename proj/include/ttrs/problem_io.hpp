#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ttrs/hybrid.hpp"

namespace ttrs {

// Parse failure with 1-based source coordinates of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int col)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ": " + message),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Objective convention a document may declare. Internally the quadratic term
// is always 1/2 x'Ax; a nohalf document states its objective as x'Ax and its
// A is doubled on ingestion.
enum class Convention { Half, NoHalf };

// Text problem document, version line "ttrs 1". Statements:
//   n <int>                      (must precede a, c, A, B)
//   convention half|nohalf       (optional; `fallback` applies when absent)
//   delta1 <real>   delta2 <real>
//   a <real>*n      c <real>*n
//   A dense <real>*n*n     or    A sparse <count> { <i> <j> <real> }*count
//   B dense ... | B sparse ...
//   end
// '#' starts a comment running to end of line. Sparse entries are 0-based
// upper-triangle coordinates (i <= j), mirrored on read. Every statement may
// span lines; `end` closes the document and trailing tokens are rejected.
TtrsProblem parse_problem(std::istream& in,
                          Convention fallback = Convention::Half);
TtrsProblem parse_problem(const std::string& text,
                          Convention fallback = Convention::Half);
// Reads the file at `path`; file-system failures surface as ParseError at
// line 0, col 0.
TtrsProblem parse_problem_file(const std::string& path,
                               Convention fallback = Convention::Half);

// Serialization always declares `convention half` and prints values with
// %.17g, so parse(serialize(p)) reproduces every dense entry bit for bit.
// A matrix section is written sparse when at most a quarter of its entries
// are structurally nonzero (deterministic, so re-serialization is stable).
void serialize_problem(const TtrsProblem& p, std::ostream& out);
std::string serialize_problem(const TtrsProblem& p);

}  // namespace ttrs
