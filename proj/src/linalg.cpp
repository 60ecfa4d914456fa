#include "ttrs/linalg.hpp"

#include <cmath>

namespace ttrs {

SymMatrix::SymMatrix(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw NotSymmetricError("SymMatrix: matrix must be square and nonempty");
  }
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw NotSymmetricError("SymMatrix: asymmetry " + std::to_string(asym) +
                            " exceeds tolerance");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  SymMatrix s;
  s.m_ = Mat::Identity(n, n);
  return s;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix s;
  s.m_ = d.asDiagonal();
  return s;
}

SymMatrix SymMatrix::from_symmetric(Mat m) {
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose()).eval();
  return s;
}

SpectralDecomp spectral(const SymMatrix& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M.mat());
  if (es.info() != Eigen::Success) {
    throw EigenIterationError("spectral: eigen-iteration failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

std::pair<double, Vec> gen_eig_max(const SymMatrix& P, const SymMatrix& Q) {
  if (P.n() != Q.n()) {
    throw PencilError("gen_eig_max: dimension mismatch");
  }
  Eigen::LLT<Mat> llt(Q.mat());
  if (llt.info() != Eigen::Success) {
    throw PencilError("gen_eig_max: right-hand matrix not positive definite");
  }
  const Mat L = llt.matrixL();
  // L^{-1} P L^{-T} stays symmetric; reduce and take the top eigenpair.
  Mat T = L.triangularView<Eigen::Lower>().solve(P.mat());
  T = L.triangularView<Eigen::Lower>().solve(T.transpose().eval());
  SpectralDecomp sd = spectral(SymMatrix::from_symmetric(std::move(T)));
  const Eigen::Index last = sd.eigenvalues.size() - 1;
  Vec v = L.transpose().triangularView<Eigen::Upper>().solve(
      Vec(sd.eigenvectors.col(last)));
  v.normalize();
  return {sd.eigenvalues(last), v};
}

Vec solve_spd(const SymMatrix& M, const Vec& b) {
  if (M.n() != b.size()) {
    throw NotPositiveDefiniteError("solve_spd: dimension mismatch");
  }
  Eigen::LLT<Mat> llt(M.mat());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("solve_spd: factorization failed");
  }
  return llt.solve(b);
}

Mat nullspace_basis(const SymMatrix& M, double tol) {
  SpectralDecomp sd = spectral(M);
  const Eigen::Index n = sd.eigenvalues.size();
  const double lmax = std::abs(sd.eigenvalues(n - 1));
  const double thresh = tol * (1.0 + lmax);
  Eigen::Index r = 0;
  while (r < n && std::abs(sd.eigenvalues(r)) <= thresh) ++r;
  return sd.eigenvectors.leftCols(r);
}

Mat b_orthonormalize(const Mat& V, const SymMatrix& B) {
  if (V.rows() != B.n() || V.cols() < 1) {
    throw RankError("b_orthonormalize: dimension mismatch or empty V");
  }
  // Symmetric orthogonalization via the spectral factor of the Gram matrix;
  // two passes cover badly conditioned inputs.
  Mat W = V;
  for (int pass = 0; pass < 2; ++pass) {
    Mat G = W.transpose() * B.mat() * W;
    SpectralDecomp sd = spectral(SymMatrix::from_symmetric(std::move(G)));
    const double gmax = sd.eigenvalues(sd.eigenvalues.size() - 1);
    if (!(gmax > 0) || sd.eigenvalues(0) <= 1e-12 * gmax) {
      throw RankError("b_orthonormalize: rank-deficient under B inner product");
    }
    W = W * sd.eigenvectors * sd.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
    const double resid =
        (W.transpose() * B.mat() * W - Mat::Identity(W.cols(), W.cols())).norm();
    if (resid <= 1e-12) break;
  }
  return W;
}

}  // namespace ttrs
