#include "projbal/fibercalc.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "projbal/quadrature.hpp"

namespace projbal {

FiberValue<QComplex> monomial_fiber_integral(const MultiIndex& I, const MultiIndex& J, int s, int r) {
  if (r < 1) throw DomainError("monomial_fiber_integral: r must be >= 1");
  if (I.rank() != r - 1 || J.rank() != r - 1)
    throw DomainError("monomial_fiber_integral: chart multi-indices must have length r - 1");
  const int n = r - 1;
  if (s <= I.degree() + n || s <= J.degree() + n) throw DomainError("monomial_fiber_integral: divergent (need s > |I| + r - 1)");
  if (I != J) return {QComplex(0), n};
  // Polar coordinates in each variable, then the Dirichlet integral
  //   ∫_{R_+^n} Π u_j^{a_j} / (1 + Σu)^s du = Π a_j! (s - n - |a| - 1)! / (s - 1)!.
  Rational v = I.factorial() * factorial(s - n - I.degree() - 1) / factorial(s - 1);
  return {QComplex(v), n};
}

Rational c_constant_coeff(int r, int d) {
  if (r < 1 || d < 0) throw DomainError("c_constant: need r >= 1, d >= 0");
  Rational two_pow = 1;
  for (int i = 1; i < r; ++i) two_pow *= 2;
  return two_pow * factorial(d) / factorial(r + d - 1);
}

FiberValue<QComplex> c_constant(int r, int d) {
  // (i dλ ∧ dλ̄)^{r-1} is 2^{r-1} times Lebesgue measure.
  FiberValue<QComplex> lebesgue = monomial_fiber_integral(MultiIndex(std::vector<int>(static_cast<std::size_t>(r - 1), 0)),
                                                           MultiIndex(std::vector<int>(static_cast<std::size_t>(r - 1), 0)), r + d, r);
  Rational two_pow = 1;
  for (int i = 1; i < r; ++i) two_pow *= 2;
  return {lebesgue.coeff * QComplex(two_pow), lebesgue.pi_power};
}

Rational projective_moment_coeff(const MultiIndex& alpha) {
  const int r = alpha.rank();
  Rational two_pow = 1;
  for (int i = 1; i < r; ++i) two_pow *= 2;
  return two_pow * alpha.factorial() / factorial(r + alpha.degree() - 1);
}

CMat apply_operator(const CMat& op, const CMat& phi) {
  const Eigen::Index R = phi.rows();
  CVec v(R * R);
  for (Eigen::Index j = 0; j < R; ++j)
    for (Eigen::Index i = 0; i < R; ++i) v(i + j * R) = phi(i, j);
  CVec w = op * v;
  CMat out(R, R);
  for (Eigen::Index j = 0; j < R; ++j)
    for (Eigen::Index i = 0; i < R; ++i) out(i, j) = w(i + j * R);
  return out;
}

FixedSpaceSplit fixed_space_projector(const CMat& T, double tol, int expected_kernel_dim) {
  const Eigen::Index n = T.rows();
  if (T.cols() != n) throw DomainError("fixed_space_projector: operator not square");
  FixedSpaceSplit out;
  Eigen::ComplexEigenSolver<CMat> es(T);
  out.eigenvalues = es.eigenvalues();
  int cluster = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double dist = std::abs(out.eigenvalues(i) - cd(1.0, 0.0));
    if (dist < tol) {
      ++cluster;
    } else {
      gap = std::min(gap, dist);
    }
  }
  out.gap = gap;
  out.kernel_dim = cluster;
  if (cluster != expected_kernel_dim)
    throw AmbiguityError("fixed_space_projector: " + std::to_string(cluster) + " eigenvalues within tol of 1, expected " +
                         std::to_string(expected_kernel_dim));
  CMat defect = CMat::Identity(n, n) - T;
  Eigen::JacobiSVD<CMat> svd(defect, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index k = cluster;
  // Singular values are sorted decreasingly: the last k right vectors span the kernel.
  out.kernel_basis = svd.matrixV().rightCols(k);
  out.image_basis = svd.matrixU().leftCols(n - k);
  CMat frame(n, n);
  frame << out.kernel_basis, out.image_basis;
  CMat coords = frame.inverse();
  out.p_kernel = out.kernel_basis * coords.topRows(k);
  out.p_image = out.image_basis * coords.bottomRows(n - k);
  return out;
}

namespace {

// One pass of the moment-coordinate rule.  λ is a unit vector sqrt(x) e^{iφ}.
CMat pairing_pass(const CMat& A, const MonomialBasis& basis, int nx, int nphi) {
  const int r = basis.rank();
  const int R = basis.size();
  const int d = basis.degree();
  const UnitRule& rule = gauss_legendre_unit(nx);
  const double dphi = 2 * std::numbers::pi / nphi;
  std::vector<cd> phase(static_cast<std::size_t>(nphi));
  for (int p = 0; p < nphi; ++p) phase[static_cast<std::size_t>(p)] = std::polar(1.0, p * dphi);
  CMat acc = CMat::Zero(R, R);

  CVec ell(R);
  std::vector<CVec> dell(static_cast<std::size_t>(r - 1), CVec(R));
  // pw[i][e] = λ_i^e in the current chart
  std::vector<std::vector<cd>> pw(static_cast<std::size_t>(r), std::vector<cd>(static_cast<std::size_t>(d + 1)));
  CVec lam(r);
  auto point = [&](const double* sx, const int* ph, double weight) {
    int j = 0;
    for (int i = 0; i < r; ++i) {
      lam(i) = sx[i] * (ph[i] < 0 ? cd(1.0) : phase[static_cast<std::size_t>(ph[i])]);
      if (std::abs(lam(i)) > std::abs(lam(j))) j = i;
    }
    // chart λ_j = 1, w = the other coordinates
    lam /= lam(j);
    int free_idx[2] = {0, 0};
    for (int i = 0, a = 0; i < r; ++i)
      if (i != j) free_idx[a++] = i;
    for (int i = 0; i < r; ++i) {
      auto& row = pw[static_cast<std::size_t>(i)];
      row[0] = 1.0;
      for (int e = 1; e <= d; ++e) row[static_cast<std::size_t>(e)] = row[static_cast<std::size_t>(e - 1)] * lam(i);
    }
    auto pow_of = [&](int i, int e) { return pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)]; };
    const int n = r - 1;
    for (int I = 0; I < R; ++I) {
      const MultiIndex& mi = basis[I];
      cd mono = 1.0;
      for (int i = 0; i < r; ++i) mono *= pow_of(i, mi[i]);
      ell(I) = mono;
      for (int a = 0; a < n; ++a) {
        const int c = free_idx[a];
        if (mi[c] == 0) {
          dell[static_cast<std::size_t>(a)](I) = 0.0;
          continue;
        }
        cd m2 = static_cast<double>(mi[c]);
        for (int i = 0; i < r; ++i) m2 *= pow_of(i, mi[i] - (i == c ? 1 : 0));
        dell[static_cast<std::size_t>(a)](I) = m2;
      }
    }
    CVec Aell = A * ell.conjugate();
    const double N = (ell.transpose() * Aell)(0).real();
    cd Na[2], Nab[2][2];
    for (int a = 0; a < n; ++a) {
      Na[a] = (dell[static_cast<std::size_t>(a)].transpose() * Aell)(0);
      CVec Ad = A * dell[static_cast<std::size_t>(a)].conjugate();
      for (int b = 0; b < n; ++b) Nab[b][a] = (dell[static_cast<std::size_t>(b)].transpose() * Ad)(0);
    }
    double w2 = 0.0;
    for (int a = 0; a < n; ++a) w2 += std::norm(lam(free_idx[a]));
    Eigen::Matrix2cd G, F;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        G(a, b) = (Nab[a][b] * N - Na[a] * std::conj(Na[b])) / (N * N);
        const cd wa = lam(free_idx[a]), wb = lam(free_idx[b]);
        F(a, b) = ((a == b ? 1 + w2 : 0.0) - std::conj(wa) * wb) / ((1 + w2) * (1 + w2));
      }
    const cd detG = n == 1 ? G(0, 0) : G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
    const cd detF = n == 1 ? F(0, 0) : F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
    const double density = (detG / detF).real();
    acc.noalias() += (weight * density / N) * (ell.conjugate() * ell.transpose());
  };

  const double tphi = std::pow(dphi, r - 1);
  if (r == 2) {
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
      CMat outer = CMat::Zero(R, R);
      std::swap(outer, acc);  // partial sums per x node keep the rounding error flat in nphi
      const double sx[2] = {std::sqrt(rule.nodes[a]), std::sqrt(std::max(0.0, 1 - rule.nodes[a]))};
      for (int p = 0; p < nphi; ++p) {
        const int ph[2] = {p, -1};
        point(sx, ph, rule.weights[a] * tphi);
      }
      std::swap(outer, acc);
      acc += outer;
    }
  } else {
    for (std::size_t a = 0; a < rule.nodes.size(); ++a)
      for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        const double x1 = rule.nodes[a], x2 = (1 - x1) * rule.nodes[b];
        const double w = rule.weights[a] * rule.weights[b] * (1 - x1) * tphi;
        const double sx[3] = {std::sqrt(x1), std::sqrt(x2), std::sqrt(std::max(0.0, 1 - x1 - x2))};
        CMat outer = CMat::Zero(R, R);
        std::swap(outer, acc);
        for (int p = 0; p < nphi; ++p)
          for (int q = 0; q < nphi; ++q) {
            const int ph[3] = {p, q, -1};
            point(sx, ph, w);
          }
        std::swap(outer, acc);
        acc += outer;
      }
  }
  return acc;
}

}  // namespace

HattedPairing hatted_pairing(const CMat& H, int r, int d, const PairingQuadrature& q) {
  MonomialBasis basis(r, d);
  if (H.rows() != basis.size() || H.cols() != basis.size()) throw DomainError("hatted_pairing: H has the wrong size");
  if (r < 1 || r > 3) throw UnsupportedInput("hatted_pairing: quadrature is implemented for r <= 3");
  require_metric(H, "hatted_pairing");
  HattedPairing out;
  if (r == 1) {
    out.pairing = H;
    return out;
  }
  const CMat A = H.inverse();
  const double K = std::pow(static_cast<double>(d), r - 1) * c_constant(r, d).value().real();
  int nx = q.x_nodes, nphi = q.phi_nodes;
  CMat prev = pairing_pass(A, basis, nx, nphi) / K;
  // refine by ~sqrt(2): at r = 3 the cost is (nx nphi)^2, and the last pass only confirms the previous one
  auto grow = [&](int m) { return std::min(q.cap, 2 * ((m * 17 / 12 + 1) / 2)); };
  while (true) {
    if (nx >= q.cap || nphi >= q.cap)
      throw PrecisionError("hatted_pairing: no convergence before the node cap (" + std::to_string(q.cap) + ")");
    nx = grow(nx);
    nphi = grow(nphi);
    CMat next = pairing_pass(A, basis, nx, nphi) / K;
    const double err = (next - prev).cwiseAbs().maxCoeff();
    if (err <= q.tol * next.cwiseAbs().maxCoeff()) {
      out.pairing = 0.5 * (next + next.adjoint());
      out.error_estimate = err;
      out.x_nodes = nx;
      out.phi_nodes = nphi;
      return out;
    }
    prev = std::move(next);
  }
}

}  // namespace projbal
