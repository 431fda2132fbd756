#pragma once

// Scalar types shared by the exact and floating-point code paths.
//
// Exact computations run over Gaussian rationals (QComplex); everything
// else runs over std::complex<double>.  Both plug into Eigen so the same
// templated algorithms serve either path.

#include <complex>
#include <ostream>
#include <string>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

namespace projbal {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using cd = std::complex<double>;

/// Gaussian rational re + i*im with exact arithmetic.
struct QComplex {
  Rational re{0};
  Rational im{0};

  QComplex() = default;
  QComplex(int v) : re(v) {}  // NOLINT(google-explicit-constructor)
  QComplex(long v) : re(v) {}  // NOLINT(google-explicit-constructor)
  QComplex(const Rational& r) : re(r) {}  // NOLINT(google-explicit-constructor)
  QComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  QComplex& operator+=(const QComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  QComplex& operator-=(const QComplex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  QComplex& operator*=(const QComplex& o) {
    Rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  QComplex& operator/=(const QComplex& o) {
    Rational den = o.re * o.re + o.im * o.im;
    Rational r = (re * o.re + im * o.im) / den;
    im = (im * o.re - re * o.im) / den;
    re = std::move(r);
    return *this;
  }
  friend QComplex operator+(QComplex a, const QComplex& b) { return a += b; }
  friend QComplex operator-(QComplex a, const QComplex& b) { return a -= b; }
  friend QComplex operator*(QComplex a, const QComplex& b) { return a *= b; }
  friend QComplex operator/(QComplex a, const QComplex& b) { return a /= b; }
  friend QComplex operator-(const QComplex& a) { return {-a.re, -a.im}; }
  friend bool operator==(const QComplex& a, const QComplex& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const QComplex& a, const QComplex& b) { return !(a == b); }

  bool is_zero() const { return re == 0 && im == 0; }
  std::string str() const;
};

inline std::string QComplex::str() const {
  if (im == 0) return re.str();
  return "(" + re.str() + (im < 0 ? " - " : " + ") + (im < 0 ? Rational(-im) : im).str() + "i)";
}

inline std::ostream& operator<<(std::ostream& os, const QComplex& z) { return os << z.str(); }

}  // namespace projbal

namespace Eigen {
template <>
struct NumTraits<projbal::QComplex> : GenericNumTraits<projbal::QComplex> {
  using Real = projbal::QComplex;
  using NonInteger = projbal::QComplex;
  using Nested = projbal::QComplex;
  using Literal = projbal::QComplex;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static inline Real epsilon() { return projbal::QComplex(0); }
  static inline Real dummy_precision() { return projbal::QComplex(0); }
  static inline int digits10() { return 0; }
};
}  // namespace Eigen

namespace projbal {

// Uniform scalar helpers used by the templated algorithms.

inline cd conj_of(const cd& z) { return std::conj(z); }
inline QComplex conj_of(const QComplex& z) { return {z.re, -z.im}; }

inline cd to_cd(const cd& z) { return z; }
inline cd to_cd(const QComplex& z) { return {z.re.convert_to<double>(), z.im.convert_to<double>()}; }

inline double real_of(const cd& z) { return z.real(); }
inline double real_of(const QComplex& z) { return z.re.convert_to<double>(); }

inline bool is_zero_of(const cd& z) { return z == cd(0.0); }
inline bool is_zero_of(const QComplex& z) { return z.is_zero(); }

/// Size used for pivot selection: magnitude for floating point, "nonzero" for exact.
inline double pivot_weight(const cd& z) { return std::abs(z); }
inline double pivot_weight(const QComplex& z) { return z.is_zero() ? 0.0 : 1.0; }

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, QComplex>;

template <class S>
S from_rational(const Rational& q) {
  if constexpr (is_exact_v<S>) {
    return S(q);
  } else {
    return S(q.convert_to<double>(), 0.0);
  }
}

template <class S>
S from_int(long v) {
  if constexpr (is_exact_v<S>) {
    return S(Rational(v));
  } else {
    return S(static_cast<double>(v), 0.0);
  }
}

/// Factorial as an exact rational.
inline Rational factorial(int n) {
  Rational f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using CMat = Mat<cd>;
using CVec = Vec<cd>;
using QMat = Mat<QComplex>;
using QVec = Vec<QComplex>;

template <class S>
Mat<S> adjoint_of(const Mat<S>& m) {
  Mat<S> out(m.cols(), m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(j, i) = conj_of(m(i, j));
  return out;
}

template <class S>
Mat<S> conj_entries(const Mat<S>& m) {
  Mat<S> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = conj_of(m(i, j));
  return out;
}

template <class S>
Mat<S> identity_of(Eigen::Index n) {
  Mat<S> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = from_int<S>(i == j ? 1 : 0);
  return out;
}

template <class S>
Mat<S> zeros_of(Eigen::Index rows, Eigen::Index cols) {
  Mat<S> out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = from_int<S>(0);
  return out;
}

/// Matrix product written out so it does not depend on Eigen's packet kernels.
template <class S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b) {
  if constexpr (is_exact_v<S>) {
    Mat<S> out = zeros_of<S>(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        if (a(i, k).is_zero()) continue;
        for (Eigen::Index j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
      }
    return out;
  } else {
    return a * b;
  }
}

inline CMat to_cmat(const QMat& m) {
  CMat out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = to_cd(m(i, j));
  return out;
}
inline CMat to_cmat(const CMat& m) { return m; }

}  // namespace projbal
