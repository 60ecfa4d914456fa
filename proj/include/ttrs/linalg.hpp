#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace ttrs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LinalgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSymmetricError : LinalgError {
  using LinalgError::LinalgError;
};
struct NotPositiveDefiniteError : LinalgError {
  using LinalgError::LinalgError;
};
struct PencilError : LinalgError {
  using LinalgError::LinalgError;
};
struct RankError : LinalgError {
  using LinalgError::LinalgError;
};
struct EigenIterationError : LinalgError {
  using LinalgError::LinalgError;
};

// Dense symmetric matrix. Construction rejects inputs whose asymmetry exceeds
// 1e-12 * (1 + max|entry|) and stores the symmetrized average, so downstream
// code may rely on exact M(i,j) == M(j,i).
class SymMatrix {
 public:
  explicit SymMatrix(const Mat& m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix diagonal(const Vec& d);
  // Trusts the caller: symmetrizes without the asymmetry check. For matrices
  // assembled from already-symmetric arithmetic where the check would only
  // cost time.
  static SymMatrix from_symmetric(Mat m);

  Eigen::Index n() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  SymMatrix() = default;
  Mat m_;
};

// Eigenvalues ascending, eigenvectors orthonormal columns in the same order.
struct SpectralDecomp {
  Vec eigenvalues;
  Mat eigenvectors;
};

SpectralDecomp spectral(const SymMatrix& M);

// Largest generalized eigenvalue and eigenvector of P v = lambda Q v for
// positive definite Q, via Cholesky reduction to a standard problem.
// The returned vector has unit Euclidean norm.
std::pair<double, Vec> gen_eig_max(const SymMatrix& P, const SymMatrix& Q);

Vec solve_spd(const SymMatrix& M, const Vec& b);

// Basis (possibly 0 columns) of the numerical nullspace of a positive
// semidefinite M: eigenvectors with |lambda| <= tol * (1 + |lambda_max|).
Mat nullspace_basis(const SymMatrix& M, double tol = 1e-8);

// W with span(W) = span(V) and W^T B W = I. Throws RankError when V is
// numerically rank-deficient in the B inner product.
Mat b_orthonormalize(const Mat& V, const SymMatrix& B);

}  // namespace ttrs
