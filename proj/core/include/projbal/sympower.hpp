#pragma once

// Symmetric-power algebra on Sym^d V in the monomial basis {e^I}.
//
// Conventions used everywhere in the library:
//   * a hermitian form is a matrix M with <u, w> = w^† M u, so M(a, b) = <e_b, e_a>;
//   * an endomorphism acts on coordinate columns, A e_i = sum_k A(k, i) e_k;
//   * the monomial basis order is MonomialBasis(r, d) (descending lex).

#include <vector>

#include "projbal/linalg.hpp"
#include "projbal/multi_index.hpp"

namespace projbal {

namespace detail {

// Ryser's formula; d is tiny so the 2^d sweep is cheap.
template <class S>
S permanent(const Mat<S>& x) {
  const int n = static_cast<int>(x.rows());
  if (n == 0) return from_int<S>(1);
  S total = from_int<S>(0);
  const unsigned long full = 1UL << n;
  for (unsigned long mask = 1; mask < full; ++mask) {
    S prod = from_int<S>(1);
    for (int i = 0; i < n; ++i) {
      S row = from_int<S>(0);
      for (int j = 0; j < n; ++j)
        if (mask & (1UL << j)) row += x(i, j);
      prod *= row;
    }
    int bits = __builtin_popcountl(mask);
    if ((n - bits) % 2 == 0) {
      total += prod;
    } else {
      total -= prod;
    }
  }
  return total;
}

inline std::vector<int> expand_multiplicities(const MultiIndex& I) {
  std::vector<int> out;
  for (int i = 0; i < I.rank(); ++i)
    for (int c = 0; c < I[i]; ++c) out.push_back(i);
  return out;
}

}  // namespace detail

/// Gram matrix of {e^I} under Sym^d h: <e^I, e^J> = perm(<e_{i_a}, e_{j_b}>) / d!.
template <class S>
Mat<S> sym_metric(const Mat<S>& h, int d) {
  require_metric(h, "sym_metric");
  const int r = static_cast<int>(h.rows());
  MonomialBasis basis(r, d);
  const int R = basis.size();
  const S inv_fact = from_rational<S>(Rational(1) / factorial(d));
  Mat<S> out(R, R);
  for (int a = 0; a < R; ++a) {
    auto ia = detail::expand_multiplicities(basis[a]);
    for (int b = 0; b < R; ++b) {
      auto jb = detail::expand_multiplicities(basis[b]);
      Mat<S> x(d, d);
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) x(p, q) = h(jb[q], ia[p]);  // <e_{ia[p]}, e_{jb[q]}>
      out(b, a) = detail::permanent(x) * inv_fact;  // M(J, I) = <e^I, e^J>
    }
  }
  return out;
}

/// Coefficients, in MonomialBasis(r, |J|), of prod_i (sum_k A(k, i) x_k)^{J_i}.
template <class S>
Vec<S> monomial_image(const Mat<S>& a, const MultiIndex& J) {
  const int r = static_cast<int>(a.rows());
  std::vector<S> poly{from_int<S>(1)};
  int deg = 0;
  for (int i = 0; i < J.rank(); ++i) {
    for (int c = 0; c < J[i]; ++c) {
      MonomialBasis cur(r, deg);
      MonomialBasis next(r, deg + 1);
      std::vector<S> out(static_cast<std::size_t>(next.size()), from_int<S>(0));
      for (int t = 0; t < cur.size(); ++t) {
        const S& coef = poly[static_cast<std::size_t>(t)];
        if (is_zero_of(coef)) continue;
        std::vector<int> e = cur[t].exponents();
        for (int k = 0; k < r; ++k) {
          if (is_zero_of(a(k, i))) continue;
          e[static_cast<std::size_t>(k)] += 1;
          out[static_cast<std::size_t>(next.index_of(e))] += coef * a(k, i);
          e[static_cast<std::size_t>(k)] -= 1;
        }
      }
      poly = std::move(out);
      ++deg;
    }
  }
  Vec<S> v(static_cast<Eigen::Index>(poly.size()));
  for (std::size_t t = 0; t < poly.size(); ++t) v(static_cast<Eigen::Index>(t)) = poly[t];
  return v;
}

/// Multiplicative representation Sym^d A: e^J -> prod (A e_i)^{J_i}.
template <class S>
Mat<S> sym_rep(const Mat<S>& a, int d) {
  if (a.rows() != a.cols()) throw DomainError("sym_rep: matrix not square");
  MonomialBasis basis(static_cast<int>(a.rows()), d);
  Mat<S> out(basis.size(), basis.size());
  for (int j = 0; j < basis.size(); ++j) out.col(j) = monomial_image(a, basis[j]);
  return out;
}

/// Derivation S^d A: e^J -> sum_i J_i e^{J - e_i} (A e_i).
template <class S>
Mat<S> sym_lie(const Mat<S>& a, int d) {
  if (a.rows() != a.cols()) throw DomainError("sym_lie: matrix not square");
  const int r = static_cast<int>(a.rows());
  MonomialBasis basis(r, d);
  Mat<S> out = zeros_of<S>(basis.size(), basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    std::vector<int> e = basis[j].exponents();
    for (int i = 0; i < r; ++i) {
      if (e[static_cast<std::size_t>(i)] == 0) continue;
      const S mult = from_int<S>(e[static_cast<std::size_t>(i)]);
      e[static_cast<std::size_t>(i)] -= 1;
      for (int k = 0; k < r; ++k) {
        e[static_cast<std::size_t>(k)] += 1;
        out(basis.index_of(e), j) += mult * a(k, i);
        e[static_cast<std::size_t>(k)] -= 1;
      }
      e[static_cast<std::size_t>(i)] += 1;
    }
  }
  return out;
}

/// Coordinates of v^d = v ... v in {e^I}: (d!/I!) v^I.
template <class S>
Vec<S> power_vector(const Vec<S>& v, int d) {
  MonomialBasis basis(static_cast<int>(v.size()), d);
  Vec<S> out(basis.size());
  for (int t = 0; t < basis.size(); ++t) {
    S m = from_rational<S>(factorial(d) / basis[t].factorial());
    for (int i = 0; i < basis.rank(); ++i)
      for (int c = 0; c < basis[t][i]; ++c) m *= v(i);
    out(t) = m;
  }
  return out;
}

/// Values ℓ_I = λ^I of the functional ξ^d on {e^I}, with λ_i = ξ(e_i).
template <class S>
Vec<S> power_covector(const Vec<S>& lambda, int d) {
  MonomialBasis basis(static_cast<int>(lambda.size()), d);
  Vec<S> out(basis.size());
  for (int t = 0; t < basis.size(); ++t) {
    S m = from_int<S>(1);
    for (int i = 0; i < basis.rank(); ++i)
      for (int c = 0; c < basis[t][i]; ++c) m *= lambda(i);
    out(t) = m;
  }
  return out;
}

namespace detail {

template <class S>
bool all_zero(const Vec<S>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!is_zero_of(v(i))) return false;
  return true;
}

template <class S>
Mat<S> rank_one_projector(const Vec<S>& w, const Mat<S>& H) {
  Mat<S> wcol = w;
  Mat<S> wdag = adjoint_of(wcol);
  Mat<S> row = matmul(wdag, H);  // w^† H
  S norm2 = matmul(row, wcol)(0, 0);
  Mat<S> out = matmul(wcol, row);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = out(i, j) / norm2;
  return out;
}

}  // namespace detail

/// H-orthogonal projector onto the line of v^d.
template <class S>
Mat<S> lambda_d(const Vec<S>& v, const Mat<S>& H, int d) {
  if (detail::all_zero(v)) throw DomainError("lambda_d: v = 0");
  return detail::rank_one_projector(power_vector(v, d), H);
}

/// Dual variant: ξ in V* with λ_i = ξ(e_i).  The functional ξ^d on Sym^d V is
/// represented as <., w>_H, so w = H^{-1} conj(ℓ).
template <class S>
Mat<S> lambda_d_dual(const Vec<S>& lambda, const Mat<S>& H, int d) {
  if (detail::all_zero(lambda)) throw DomainError("lambda_d_dual: covector = 0");
  Vec<S> l = power_covector(lambda, d);
  Mat<S> lbar = conj_entries(Mat<S>(l));
  Mat<S> w = matmul(inverse_of(H), lbar);
  return detail::rank_one_projector(Vec<S>(w.col(0)), H);
}

template <class S>
S trace_of(const Mat<S>& m) {
  S t = from_int<S>(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

}  // namespace projbal
