#pragma once

// Seeded random inputs for the experiment suites.

#include <random>

#include "projbal/scalar.hpp"

namespace projbal::cli {

using Rng = std::mt19937_64;

inline Rational small_rational(Rng& rng, int num = 5, int den = 4) {
  std::uniform_int_distribution<int> n(-num, num), q(1, den);
  return Rational(n(rng)) / q(rng);
}

inline QMat random_qmat(Rng& rng, int rows, int cols) {
  QMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = QComplex(small_rational(rng), small_rational(rng));
  return m;
}

/// B^† B + I, exact.
inline QMat random_qmetric(Rng& rng, int r) {
  QMat b = random_qmat(rng, r, r);
  QMat m = matmul(adjoint_of(b), b);
  for (int i = 0; i < r; ++i) m(i, i) += QComplex(1);
  return m;
}

inline CMat random_cmat(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cd(g(rng), g(rng));
  return m;
}

inline CMat random_cmetric(Rng& rng, int r, double spread = 0.5) {
  CMat b = random_cmat(rng, r, r) * spread;
  return b.adjoint() * b + CMat::Identity(r, r);
}

/// m^{-1} X with X hermitian: hermitian for the metric m.
inline CMat random_h_hermitian(Rng& rng, const CMat& m) {
  CMat x = random_cmat(rng, static_cast<int>(m.rows()), static_cast<int>(m.rows()));
  return m.inverse() * ((x + x.adjoint()) / 2.0);
}

inline double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace projbal::cli
