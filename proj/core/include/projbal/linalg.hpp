#pragma once

// Small dense linear algebra that works for both QComplex and cd.
// Eigen's decompositions are used directly for the double path where they
// are clearly better (eigenvalues, SVD); the routines here cover what the
// exact path needs.

#include <cmath>
#include <utility>

#include "projbal/errors.hpp"
#include "projbal/scalar.hpp"

namespace projbal {

/// Gauss-Jordan inverse with partial pivoting (any nonzero pivot when exact).
template <class S>
Mat<S> inverse_of(const Mat<S>& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DomainError("inverse_of: matrix not square");
  Mat<S> m = a;
  Mat<S> inv = identity_of<S>(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    double best = 0.0;
    for (Eigen::Index r = c; r < n; ++r) {
      double w = pivot_weight(m(r, c));
      if (w > best) {
        best = w;
        piv = r;
        if constexpr (is_exact_v<S>) break;
      }
    }
    if (piv < 0) throw DomainError("inverse_of: singular matrix");
    if (piv != c) {
      m.row(c).swap(m.row(piv));
      inv.row(c).swap(inv.row(piv));
    }
    S p = m(c, c);
    for (Eigen::Index j = 0; j < n; ++j) {
      m(c, j) = m(c, j) / p;
      inv(c, j) = inv(c, j) / p;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c || is_zero_of(m(r, c))) continue;
      S f = m(r, c);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

template <class S>
S determinant_of(const Mat<S>& a) {
  const Eigen::Index n = a.rows();
  Mat<S> m = a;
  S det = from_int<S>(1);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = -1;
    double best = 0.0;
    for (Eigen::Index r = c; r < n; ++r) {
      double w = pivot_weight(m(r, c));
      if (w > best) {
        best = w;
        piv = r;
        if constexpr (is_exact_v<S>) break;
      }
    }
    if (piv < 0) return from_int<S>(0);
    if (piv != c) {
      m.row(c).swap(m.row(piv));
      det = -det;
    }
    det *= m(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (is_zero_of(m(r, c))) continue;
      S f = m(r, c) / m(c, c);
      for (Eigen::Index j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return det;
}

/// P = L D L^† for hermitian P; L unit lower triangular, D real diagonal.
/// Throws DomainError when a pivot is not strictly positive, so a
/// successful return certifies positive-definiteness.
template <class S>
std::pair<Mat<S>, Vec<S>> ldl_hermitian(const Mat<S>& p) {
  const Eigen::Index n = p.rows();
  Mat<S> L = identity_of<S>(n);
  Vec<S> D(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    S dj = p(j, j);
    for (Eigen::Index k = 0; k < j; ++k) dj -= L(j, k) * conj_of(L(j, k)) * D(k);
    if (!(real_of(dj) > 0.0)) throw DomainError("ldl_hermitian: matrix is not positive-definite");
    if constexpr (is_exact_v<S>) {
      dj.im = 0;
    } else {
      dj = cd(dj.real(), 0.0);
    }
    D(j) = dj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      S v = p(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * conj_of(L(j, k)) * D(k);
      L(i, j) = v / dj;
    }
  }
  return {L, D};
}

/// Largest entrywise modulus of a - a^†.
template <class S>
double hermitian_defect(const Mat<S>& a) {
  double out = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out = std::max(out, std::abs(to_cd(a(i, j)) - std::conj(to_cd(a(j, i)))));
  return out;
}

/// Throws DomainError unless m is hermitian (1e-12) and positive-definite.
template <class S>
void require_metric(const Mat<S>& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError(std::string(who) + ": metric must be square and nonempty");
  double scale = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) scale = std::max(scale, std::abs(to_cd(m(i, i))));
  if (hermitian_defect(m) > 1e-12 * std::max(1.0, scale))
    throw DomainError(std::string(who) + ": metric is not hermitian");
  if constexpr (is_exact_v<S>) {
    ldl_hermitian(m);
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw DomainError(std::string(who) + ": metric is not positive-definite");
  }
}

/// A^{*h} = M^{-1} A^† M, the adjoint with respect to <u,w> = w^† M u.
template <class S>
Mat<S> h_adjoint(const Mat<S>& a, const Mat<S>& metric) {
  return matmul(inverse_of(metric), matmul(adjoint_of(a), metric));
}

/// Hermitian square root and inverse square root of a positive-definite matrix.
inline std::pair<CMat, CMat> sqrt_and_inv_sqrt(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(m);
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw DomainError("sqrt_and_inv_sqrt: not positive-definite");
  Eigen::VectorXd s = ev.cwiseSqrt();
  CMat U = es.eigenvectors();
  CMat sq = U * s.cast<cd>().asDiagonal() * U.adjoint();
  CMat isq = U * s.cwiseInverse().cast<cd>().asDiagonal() * U.adjoint();
  return {sq, isq};
}

/// Largest singular value.
inline double op_norm(const CMat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(m);
  return svd.singularValues()(0);
}

}  // namespace projbal
