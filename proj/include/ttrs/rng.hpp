#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ttrs/linalg.hpp"

namespace ttrs {

// Deterministic random draws layered on mt19937_64. The standard library's
// distribution objects are implementation-defined, so every distribution here
// is hand-rolled to keep generator output identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

  std::uint64_t integer(std::uint64_t k) {  // uniform in [0, k)
    return eng_() % k;
  }

  Vec normal_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Vec unit_vec(Eigen::Index n) {
    Vec v = normal_vec(n);
    const double nn = v.norm();
    return nn > 0 ? Vec(v / nn) : unit_vec(n);
  }

  Mat normal_mat(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  // Haar-ish orthogonal matrix: QR of a normal matrix with the sign of each
  // R diagonal folded into the corresponding Q column.
  Mat orthogonal(Eigen::Index n) {
    Mat g = normal_mat(n, n);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ttrs
