#pragma once

// Template bodies for fibercalc.hpp.

#include <cmath>
#include <numbers>

namespace projbal {

template <class S>
cd FiberValue<S>::value() const {
  return to_cd(coeff) * std::pow(std::numbers::pi, pi_power);
}

template <class S>
FiberMoments<S>::FiberMoments(const Mat<S>& h) : r_(static_cast<int>(h.rows())), h_(h) {
  require_metric(h, "FiberMoments");
  a_ = inverse_of(h);
  // Q(λ) = λ^T A conj(λ) = λ^† A^T λ, and A^T = L D L^†.
  Mat<S> p = a_.transpose();
  auto [L, D] = ldl_hermitian(p);
  dpiv_ = D;
  // μ = L^† λ, so λ = B μ with B = L^{-†} and B^T = conj(L^{-1}).
  bt_ = conj_entries(inverse_of(L));
}

template <class S>
const Mat<S>& FiberMoments<S>::moments(int n) {
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  MonomialBasis basis(r_, n);
  const int R = basis.size();
  // A(α, γ): coefficient of μ^γ in λ^α.
  Mat<S> A(R, R);
  for (int al = 0; al < R; ++al) {
    Vec<S> img = monomial_image(bt_, basis[al]);
    for (int g = 0; g < R; ++g) A(al, g) = img(g);
  }
  Vec<S> w(R);
  for (int g = 0; g < R; ++g) {
    S val = from_rational<S>(projective_moment_coeff(basis[g]));
    for (int k = 0; k < r_; ++k)
      for (int c = 0; c < basis[g][k]; ++c) val = val / dpiv_(k);
    w(g) = val;
  }
  Mat<S> out = zeros_of<S>(R, R);
  for (int al = 0; al < R; ++al)
    for (int be = 0; be < R; ++be) {
      S acc = from_int<S>(0);
      for (int g = 0; g < R; ++g) {
        if (is_zero_of(A(al, g)) || is_zero_of(A(be, g))) continue;
        acc += A(al, g) * conj_of(A(be, g)) * w(g);
      }
      out(al, be) = acc;
    }
  return cache_.emplace(n, std::move(out)).first->second;
}

template <class S>
HomogeneousFiberFunction<S> HomogeneousFiberFunction<S>::constant(const Mat<S>& h, const S& c) {
  HomogeneousFiberFunction f;
  f.order = 0;
  f.metric = h;
  f.coeffs = Mat<S>(1, 1);
  f.coeffs(0, 0) = c;
  return f;
}

template <class S>
bool HomogeneousFiberFunction<S>::is_real(double tol) const {
  if constexpr (is_exact_v<S>) {
    return coeffs == adjoint_of(coeffs);
  } else {
    return hermitian_defect(coeffs) <= tol * std::max(1.0, coeffs.cwiseAbs().maxCoeff());
  }
}

template <class S>
cd HomogeneousFiberFunction<S>::evaluate(const CVec& lambda) const {
  CVec l = power_covector(lambda, order);
  CMat c = to_cmat(coeffs);
  CMat a = to_cmat(inverse_of(metric));
  cd q = (lambda.transpose() * a * lambda.conjugate())(0, 0);
  cd num = (l.transpose() * c * l.conjugate())(0, 0);
  return num / std::pow(q.real(), order);
}

template <class S>
S integrate(const HomogeneousFiberFunction<S>& f, FiberMoments<S>& mom) {
  const Mat<S>& m = mom.moments(f.order);
  S acc = from_int<S>(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!is_zero_of(f.coeffs(i, j))) acc += f.coeffs(i, j) * m(i, j);
  return acc;
}

template <class S>
FiberValue<S> hat_inner_integral_fs(const Vec<S>& v, const Vec<S>& w, const Mat<S>& h, int d) {
  FiberMoments<S> mom(h);
  const Mat<S>& m = mom.moments(d);
  if (v.size() != m.rows() || w.size() != m.rows()) throw DomainError("hat_inner_integral: dimension mismatch");
  S acc = from_int<S>(0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc += v(i) * conj_of(w(j)) * m(i, j);
  return {acc, mom.rank() - 1};
}

template <class S>
FiberValue<S> hat_inner_integral(const Vec<S>& v, const Vec<S>& w, const Mat<S>& h, int d) {
  FiberValue<S> out = hat_inner_integral_fs(v, w, h, d);
  long scale = 1;
  for (int i = 1; i < h.rows(); ++i) scale *= d;
  out.coeff *= from_int<S>(scale);
  return out;
}

namespace detail {

// table[K][I] = index of K + I in MonomialBasis(r, |K| + |I|)
inline std::vector<std::vector<int>> sum_table(int r, int n1, int n2) {
  MonomialBasis b1(r, n1), b2(r, n2), b12(r, n1 + n2);
  std::vector<std::vector<int>> t(static_cast<std::size_t>(b1.size()), std::vector<int>(static_cast<std::size_t>(b2.size())));
  for (int k = 0; k < b1.size(); ++k)
    for (int i = 0; i < b2.size(); ++i) t[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = b12.index_of(b1[k] + b2[i]);
  return t;
}

}  // namespace detail

template <class S>
Mat<S> pushforward_endo(const HomogeneousFiberFunction<S>& f, int d, FiberMoments<S>& mom, bool require_real) {
  if (require_real && !f.is_real()) throw DomainError("pushforward_endo: f is not real-valued");
  const int r = mom.rank();
  const int N = f.order;
  const Mat<S>& M = mom.moments(N + d);
  auto tab = detail::sum_table(r, N, d);
  const int RN = static_cast<int>(tab.size());
  const int Rd = RN ? static_cast<int>(tab[0].size()) : 0;
  // G(J, I) = Σ_{K,L} f_{KL} Mom(K+I, L+J)
  Mat<S> G = zeros_of<S>(Rd, Rd);
  for (int K = 0; K < RN; ++K)
    for (int L = 0; L < RN; ++L) {
      const S& c = f.coeffs(K, L);
      if (is_zero_of(c)) continue;
      for (int I = 0; I < Rd; ++I)
        for (int J = 0; J < Rd; ++J) G(J, I) += c * M(tab[K][I], tab[L][J]);
    }
  Mat<S> Hinv = inverse_of(sym_metric(mom.metric(), d));
  Mat<S> psi = matmul(Hinv, G);
  const S cinv = from_rational<S>(Rational(1) / c_constant_coeff(r, d));
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    for (Eigen::Index j = 0; j < psi.cols(); ++j) psi(i, j) *= cinv;
  return psi;
}

template <class S>
Mat<S> pushforward_endo(const HomogeneousFiberFunction<S>& f, int d, bool require_real) {
  FiberMoments<S> mom(f.metric);
  return pushforward_endo(f, d, mom, require_real);
}

template <class S>
HomogeneousFiberFunction<S> f_of_phi(const Mat<S>& phi, const Mat<S>& h, int d) {
  Mat<S> H = sym_metric(h, d);
  if (phi.rows() != H.rows() || phi.cols() != H.cols()) throw DomainError("f_of_phi: dimension mismatch");
  HomogeneousFiberFunction<S> f;
  f.order = d;
  f.metric = h;
  f.coeffs = matmul(phi, inverse_of(H));
  return f;
}

template <class S>
HomogeneousFiberFunction<S> delta_tilde(const HomogeneousFiberFunction<S>& f, int d, double scale) {
  const int r = static_cast<int>(f.metric.rows());
  const int N = f.order;
  MonomialBasis basis(r, N);
  const int R = basis.size();
  HomogeneousFiberFunction<S> out;
  out.order = N;
  out.metric = f.metric;
  out.coeffs = zeros_of<S>(R, R);
  if (N == 0) return out;
  const Mat<S>& h = f.metric;
  Mat<S> A = inverse_of(h);
  for (int I = 0; I < R; ++I)
    for (int J = 0; J < R; ++J) {
      const S& c = f.coeffs(I, J);
      if (is_zero_of(c)) continue;
      std::vector<int> ei = basis[I].exponents(), ej = basis[J].exponents();
      for (int i = 0; i < r; ++i) {
        if (ei[static_cast<std::size_t>(i)] == 0) continue;
        for (int j = 0; j < r; ++j) {
          if (ej[static_cast<std::size_t>(j)] == 0 || is_zero_of(h(j, i))) continue;
          const S base = c * from_int<S>(ei[static_cast<std::size_t>(i)] * ej[static_cast<std::size_t>(j)]) * h(j, i);
          ei[static_cast<std::size_t>(i)]--;
          ej[static_cast<std::size_t>(j)]--;
          for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
              if (is_zero_of(A(a, b))) continue;
              ei[static_cast<std::size_t>(a)]++;
              ej[static_cast<std::size_t>(b)]++;
              out.coeffs(basis.index_of(ei), basis.index_of(ej)) += base * A(a, b);
              ei[static_cast<std::size_t>(a)]--;
              ej[static_cast<std::size_t>(b)]--;
            }
          ei[static_cast<std::size_t>(i)]++;
          ej[static_cast<std::size_t>(j)]++;
        }
      }
    }
  const S eig = from_int<S>(static_cast<long>(N) * (N + r - 1));
  const S factor = -from_rational<S>(Rational(scale)) / from_int<S>(d);
  for (int I = 0; I < R; ++I)
    for (int J = 0; J < R; ++J) out.coeffs(I, J) = (out.coeffs(I, J) - eig * f.coeffs(I, J)) * factor;
  return out;
}

template <class S>
Mat<S> t_operator(const Mat<S>& h, int d, double delta_scale) {
  FiberMoments<S> mom(h);
  const int R = static_cast<int>(sym_dim(static_cast<int>(h.rows()), d));
  Mat<S> T = zeros_of<S>(static_cast<Eigen::Index>(R) * R, static_cast<Eigen::Index>(R) * R);
  for (int b = 0; b < R; ++b)
    for (int a = 0; a < R; ++a) {
      Mat<S> unit = zeros_of<S>(R, R);
      unit(a, b) = from_int<S>(1);
      HomogeneousFiberFunction<S> F = f_of_phi(unit, h, d);
      HomogeneousFiberFunction<S> DF = delta_tilde(F, d, delta_scale);
      for (Eigen::Index i = 0; i < F.coeffs.rows(); ++i)
        for (Eigen::Index j = 0; j < F.coeffs.cols(); ++j) F.coeffs(i, j) += DF.coeffs(i, j);
      Mat<S> psi = pushforward_endo(F, d, mom, false);
      const Eigen::Index col = a + static_cast<Eigen::Index>(b) * R;
      for (int j = 0; j < R; ++j)
        for (int i = 0; i < R; ++i) T(i + static_cast<Eigen::Index>(j) * R, col) = psi(i, j);
    }
  return T;
}

}  // namespace projbal
