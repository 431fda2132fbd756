#include "projbal/balancing.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "projbal/bergman.hpp"
#include "projbal/errors.hpp"
#include "projbal/linalg.hpp"
#include "projbal/sympower.hpp"

namespace projbal {

QMat hatted_pairing_exact(const QMat& h, int d) {
  require_metric(h, "hatted_pairing_exact");
  const int r = static_cast<int>(h.rows());
  const int R = static_cast<int>(sym_dim(r, d));
  Rational K = c_constant_coeff(r, d);
  for (int i = 1; i < r; ++i) K *= d;
  QMat out = zeros_of<QComplex>(R, R);
  for (int I = 0; I < R; ++I)
    for (int J = 0; J < R; ++J) {
      QVec eI = zeros_of<QComplex>(R, 1), eJ = zeros_of<QComplex>(R, 1);
      eI(I) = QComplex(1);
      eJ(J) = QComplex(1);
      auto v = hat_inner_integral(eI, eJ, h, d);
      out(J, I) = v.coeff * QComplex(1 / K);
    }
  return out;
}

namespace {

double det_real(const CMat& m) { return m.determinant().real(); }

}  // namespace

CMat fiber_tmap(const CMat& H, int r, int d, const PairingQuadrature& q) {
  require_metric(H, "fiber_tmap");
  const auto R = static_cast<double>(H.rows());
  CMat P = hatted_pairing(H, r, d, q).pairing;
  return P * std::pow(det_real(H) / det_real(P), 1.0 / R);
}

double balance_residual(const CMat& H, const CMat& pair) {
  auto [sq, isq] = sqrt_and_inv_sqrt(H);
  CMat G = isq * pair * isq;
  G = 0.5 * (G + G.adjoint());
  const double c = std::pow(det_real(G), 1.0 / static_cast<double>(G.rows()));
  return op_norm(G / c - CMat::Identity(G.rows(), G.cols()));
}

double bergman_spread(const CMat& H, const CMat& pair, int /*r*/, int d, const std::vector<CVec>& points) {
  const CMat Hinv = H.inverse(), Pinv = pair.inverse();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (const CVec& lam : points) {
    CVec ell = power_covector(lam, d);
    const double v = (ell.transpose() * Pinv * ell.conjugate())(0).real() / (ell.transpose() * Hinv * ell.conjugate())(0).real();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return (hi - lo) / (sum / static_cast<double>(points.size()));
}

BalanceState fiber_balance(const CMat& H0, int r, int d, const BalanceOptions& opts) {
  require_metric(H0, "fiber_balance");
  BalanceState st;
  st.H = H0;
  const double det0 = det_real(H0);
  const auto points = fiber_sample_points(r, opts.certificate_points);
  CMat P = hatted_pairing(st.H, r, d, opts.quad).pairing;
  while (true) {
    st.residual = balance_residual(st.H, P);
    st.history.push_back(st.residual);
    if (st.residual < opts.tol) {
      st.converged = true;
      break;
    }
    if (st.iteration >= opts.max_iter) break;
    const double R = static_cast<double>(st.H.rows());
    st.H = P * std::pow(det_real(st.H) / det_real(P), 1.0 / R);
    st.H = 0.5 * (st.H + st.H.adjoint());
    st.det_drift = std::max(st.det_drift, std::abs(det_real(st.H) / det0 - 1));
    ++st.iteration;
    P = hatted_pairing(st.H, r, d, opts.quad).pairing;
  }
  st.certificate = bergman_spread(st.H, P, r, d, points);
  st.certified = st.converged && st.certificate < opts.certificate_tol;
  return st;
}

}  // namespace projbal
