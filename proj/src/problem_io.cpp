#include "ttrs/problem_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace ttrs {

namespace {

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

// Whitespace-separated tokens with '#' line comments and 1-based positions.
class Lexer {
 public:
  explicit Lexer(std::string text) : text_(std::move(text)) {}

  std::optional<Token> next() {
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        advance();
        continue;
      }
      break;
    }
    if (pos_ >= text_.size()) return std::nullopt;
    Token tok;
    tok.line = line_;
    tok.col = col_;
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '#') {
        break;
      }
      tok.text.push_back(ch);
      advance();
    }
    return tok;
  }

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string text, Convention fallback)
      : lex_(std::move(text)), convention_(fallback) {}

  TtrsProblem run() {
    expect_keyword("ttrs", "document must start with `ttrs 1`");
    const Token version = require("version number");
    if (version.text != "1") {
      fail(version, "unsupported format version `" + version.text +
                        "` (this reader understands version 1)");
    }
    Token end_stmt;
    for (;;) {
      const Token stmt = require("statement or `end`");
      if (stmt.text == "end") {
        end_stmt = stmt;
        break;
      }
      dispatch(stmt);
    }
    if (auto extra = lex_.next()) {
      fail(*extra, "unexpected content after `end`");
    }
    return assemble(end_stmt);
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(msg, at.line, at.col);
  }
  [[noreturn]] void fail_here(const std::string& msg) const {
    throw ParseError(msg, lex_.line(), lex_.col());
  }

  Token require(const std::string& what) {
    auto tok = lex_.next();
    if (!tok) fail_here("unexpected end of document, expected " + what);
    return *tok;
  }

  void expect_keyword(const std::string& kw, const std::string& msg) {
    const Token tok = require("`" + kw + "`");
    if (tok.text != kw) fail(tok, msg);
  }

  double parse_real(const std::string& what) {
    const Token tok = require(what);
    const char* begin = tok.text.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end != begin + tok.text.size() || tok.text.empty()) {
      fail(tok, "expected " + what + ", got `" + tok.text + "`");
    }
    return value;
  }

  long long parse_int(const std::string& what) {
    const Token tok = require(what);
    const char* begin = tok.text.c_str();
    char* end = nullptr;
    const long long value = std::strtoll(begin, &end, 10);
    if (end != begin + tok.text.size() || tok.text.empty()) {
      fail(tok, "expected " + what + ", got `" + tok.text + "`");
    }
    return value;
  }

  int need_n(const Token& stmt) {
    if (n_ < 0) {
      fail(stmt, "`" + stmt.text + "` requires `n` to appear first");
    }
    return n_;
  }

  void reject_duplicate(const Token& stmt, bool seen) {
    if (seen) fail(stmt, "duplicate `" + stmt.text + "` section");
  }

  Vec parse_vector(const Token& stmt) {
    const int n = need_n(stmt);
    Vec v(n);
    for (int i = 0; i < n; ++i) {
      v(i) = parse_real("entry " + std::to_string(i) + " of `" + stmt.text +
                        "`");
    }
    return v;
  }

  Mat parse_matrix(const Token& stmt) {
    const int n = need_n(stmt);
    const Token layout = require("`dense` or `sparse`");
    Mat m = Mat::Zero(n, n);
    if (layout.text == "dense") {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          m(i, j) = parse_real("entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") of `" + stmt.text +
                               "`");
        }
      }
      return m;
    }
    if (layout.text != "sparse") {
      fail(layout, "matrix layout must be `dense` or `sparse`, got `" +
                       layout.text + "`");
    }
    const long long count = parse_int("sparse entry count");
    if (count < 0 || count > 1LL * n * n) {
      fail(layout, "sparse entry count out of range");
    }
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n,
                                                                      false);
    for (long long k = 0; k < count; ++k) {
      const Token itok = require("sparse row index");
      long long i = 0, j = 0;
      {
        const char* begin = itok.text.c_str();
        char* end = nullptr;
        i = std::strtoll(begin, &end, 10);
        if (end != begin + itok.text.size() || itok.text.empty()) {
          fail(itok, "expected sparse row index, got `" + itok.text + "`");
        }
      }
      j = parse_int("sparse column index");
      if (i < 0 || j < 0 || i >= n || j >= n) {
        fail(itok, "sparse index (" + std::to_string(i) + "," +
                       std::to_string(j) + ") outside [0," +
                       std::to_string(n - 1) + "]");
      }
      if (i > j) {
        fail(itok, "sparse entries are upper-triangle: need i <= j, got (" +
                       std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (seen(i, j)) {
        fail(itok, "duplicate sparse entry (" + std::to_string(i) + "," +
                       std::to_string(j) + ")");
      }
      seen(i, j) = true;
      const double v = parse_real("sparse entry value");
      m(i, j) = v;
      m(j, i) = v;
    }
    return m;
  }

  void dispatch(const Token& stmt) {
    if (stmt.text == "n") {
      reject_duplicate(stmt, n_ >= 0);
      const long long n = parse_int("dimension");
      if (n < 1 || n > 100000) fail(stmt, "dimension out of range");
      n_ = int(n);
    } else if (stmt.text == "convention") {
      reject_duplicate(stmt, convention_seen_);
      convention_seen_ = true;
      const Token val = require("`half` or `nohalf`");
      if (val.text == "half") {
        convention_ = Convention::Half;
      } else if (val.text == "nohalf") {
        convention_ = Convention::NoHalf;
      } else {
        fail(val, "convention must be `half` or `nohalf`, got `" + val.text +
                      "`");
      }
    } else if (stmt.text == "delta1") {
      reject_duplicate(stmt, delta1_.has_value());
      delta1_ = parse_real("delta1 value");
      if (!(*delta1_ > 0.0)) fail(stmt, "delta1 must be positive");
    } else if (stmt.text == "delta2") {
      reject_duplicate(stmt, delta2_.has_value());
      delta2_ = parse_real("delta2 value");
      if (!(*delta2_ > 0.0)) fail(stmt, "delta2 must be positive");
    } else if (stmt.text == "a") {
      reject_duplicate(stmt, a_.has_value());
      a_ = parse_vector(stmt);
    } else if (stmt.text == "c") {
      reject_duplicate(stmt, c_.has_value());
      c_ = parse_vector(stmt);
    } else if (stmt.text == "A") {
      reject_duplicate(stmt, A_.has_value());
      A_stmt_ = stmt;
      A_ = parse_matrix(stmt);
    } else if (stmt.text == "B") {
      reject_duplicate(stmt, B_.has_value());
      B_stmt_ = stmt;
      B_ = parse_matrix(stmt);
    } else {
      fail(stmt, "unknown statement `" + stmt.text + "`");
    }
  }

  SymMatrix to_symmetric(const Mat& m, const Token& at) const {
    try {
      return SymMatrix(m);
    } catch (const NotSymmetricError& e) {
      fail(at, std::string("matrix `") + at.text + "` is not symmetric: " +
                   e.what());
    }
  }

  TtrsProblem assemble(const Token& end_tok) const {
    auto missing = [&](const char* what) {
      fail(end_tok, std::string("document ended without a `") + what +
                        "` section");
    };
    if (n_ < 0) missing("n");
    if (!A_) missing("A");
    if (!B_) missing("B");
    if (!a_) missing("a");
    if (!c_) missing("c");
    if (!delta1_) missing("delta1");
    if (!delta2_) missing("delta2");
    Mat quad = *A_;
    if (convention_ == Convention::NoHalf) quad *= 2.0;
    return TtrsProblem(to_symmetric(quad, A_stmt_), *a_,
                       to_symmetric(*B_, B_stmt_), *c_, *delta1_, *delta2_);
  }

  Lexer lex_;
  Convention convention_;
  bool convention_seen_ = false;
  int n_ = -1;
  std::optional<double> delta1_, delta2_;
  std::optional<Vec> a_, c_;
  std::optional<Mat> A_, B_;
  Token A_stmt_, B_stmt_;
};

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_vector(std::ostream& out, const char* name, const Vec& v) {
  out << name;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_real(v(i));
  out << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Mat& m) {
  const Eigen::Index n = m.rows();
  Eigen::Index nnz = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (m(i, j) != 0.0) ++nnz;
    }
  }
  const Eigen::Index upper = n * (n + 1) / 2;
  if (4 * nnz <= upper) {
    out << name << " sparse " << nnz << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        if (m(i, j) != 0.0) {
          out << i << ' ' << j << ' ' << format_real(m(i, j)) << '\n';
        }
      }
    }
    return;
  }
  out << name << " dense\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out << (j ? " " : "") << format_real(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace

TtrsProblem parse_problem(std::istream& in, Convention fallback) {
  std::string text(std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>{});
  return Parser(std::move(text), fallback).run();
}

TtrsProblem parse_problem(const std::string& text, Convention fallback) {
  return Parser(text, fallback).run();
}

TtrsProblem parse_problem_file(const std::string& path, Convention fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open `" + path + "` for reading", 0, 0);
  }
  return parse_problem(in, fallback);
}

void serialize_problem(const TtrsProblem& p, std::ostream& out) {
  out << "ttrs 1\n";
  out << "n " << p.n() << '\n';
  out << "convention half\n";
  out << "delta1 " << format_real(p.delta1) << '\n';
  out << "delta2 " << format_real(p.delta2) << '\n';
  write_matrix(out, "A", p.A.mat());
  write_vector(out, "a", p.a);
  write_matrix(out, "B", p.B.mat());
  write_vector(out, "c", p.c);
  out << "end\n";
}

std::string serialize_problem(const TtrsProblem& p) {
  std::ostringstream out;
  serialize_problem(p, out);
  return out.str();
}

}  // namespace ttrs
