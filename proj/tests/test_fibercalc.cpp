#include "doctest.h"

#include <algorithm>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "projbal/fibercalc.hpp"
#include "test_util.hpp"

using namespace projbal;
using namespace projbal::testing;

namespace {

const double kPi = std::acos(-1.0);

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

QComplex qc(long n, long d = 1) { return QComplex(Rational(n) / d); }

/// Λ_{ω_Q} i∂∂̄ f at λ = (z, 1) by a 5-point Laplacian in the chart (r = 2).
double chart_laplacian(const std::function<double(cd)>& f, const CMat& h, cd z) {
  const double e = 1e-3;
  auto lap = [&](const std::function<double(cd)>& g) {
    return (g(z + e) + g(z - e) + g(z + cd(0, e)) + g(z - cd(0, e)) - 4 * g(z)) / (e * e) / 4.0;
  };
  CMat A = h.inverse();
  auto logq = [&](cd w) {
    CVec l(2);
    l << w, 1.0;
    return std::log((l.transpose() * A * l.conjugate())(0, 0).real());
  };
  return lap(f) / lap(logq);
}

}  // namespace

TEST_CASE("monomial_fiber_integral closed form and radial oracle") {
  auto v = monomial_fiber_integral(mi({1}), mi({1}), 4, 2);
  CHECK(v.pi_power == 1);
  CHECK(v.coeff == qc(1, 6));
  CHECK(monomial_fiber_integral(mi({0}), mi({0}), 3, 2).coeff == qc(1, 2));
  boost::math::quadrature::exp_sinh<double> integrator;
  for (int a = 0; a <= 3; ++a)
    for (int s = a + 2; s <= a + 5; ++s) {
      double oracle = kPi * integrator.integrate([&](double u) { return u <= 0 ? (a == 0 ? 1.0 : 0.0) : std::exp(a * std::log(u) - s * std::log1p(u)); });
      CHECK(monomial_fiber_integral(mi({a}), mi({a}), s, 2).value().real() == doctest::Approx(oracle).epsilon(1e-10));
    }
  CHECK_THROWS_AS(monomial_fiber_integral(mi({2}), mi({2}), 3, 2), DomainError);
}

TEST_CASE("monomial_fiber_integral vanishes off the diagonal") {
  for (int r = 2; r <= 3; ++r)
    for (int n1 = 0; n1 <= 3; ++n1)
      for (int n2 = 0; n2 <= 3; ++n2) {
        MonomialBasis b1(r, n1), b2(r, n2);
        for (const auto& I : b1.indices())
          for (const auto& J : b2.indices()) {
            std::vector<int> ci(I.exponents().begin(), I.exponents().end() - 1);
            std::vector<int> cj(J.exponents().begin(), J.exponents().end() - 1);
            auto v = monomial_fiber_integral(mi(ci), mi(cj), 8, r);
            CHECK((ci == cj) == !v.coeff.is_zero());
          }
      }
}

TEST_CASE("c_constant values") {
  for (int d = 0; d <= 5; ++d) CHECK(c_constant(1, d).coeff == qc(1));
  CHECK(c_constant(2, 1).coeff == qc(1));
  CHECK(c_constant(2, 1).pi_power == 1);
  CHECK(c_constant(2, 2).coeff == qc(2, 3));
  for (int d = 0; d <= 4; ++d) {
    double oracle = 2 * kPi / (d + 1);  // 2π ∫ u^0 (1+u)^{-(2+d)} du
    CHECK(c_constant(2, d).value().real() == doctest::Approx(oracle));
    CHECK(QComplex(c_constant_coeff(3, d)) == c_constant(3, d).coeff);
  }
}

TEST_CASE("moment matrices reproduce C_{r,d} Sym^d h exactly") {
  Rng rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    int r = 2 + trial % 2, d = 1 + trial % 3;
    QMat h = random_qmetric(rng, r);
    FiberMoments<QComplex> mom(h);
    QMat lhs = mom.moments(d);
    QMat rhs = sym_metric(h, d).transpose() * QComplex(c_constant_coeff(r, d));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("hat_inner_integral: values, orthogonality, quadrature oracle") {
  QMat I2 = identity_of<QComplex>(2);
  QVec e = zeros_of<QComplex>(2, 1).col(0);
  e(0) = qc(1);
  auto v = hat_inner_integral(e, e, I2, 1);
  CHECK(v.coeff == c_constant(2, 1).coeff);
  CHECK(v.pi_power == 1);
  // Sym^2 h-orthogonal pair
  QVec a = zeros_of<QComplex>(3, 1).col(0), b = a;
  a(0) = qc(1);
  b(1) = qc(1);
  CHECK(hat_inner_integral(a, b, I2, 2).coeff.is_zero());

  Rng rng(22);
  for (int trial = 0; trial < 3; ++trial) {
    const int r = 3, d = 2;
    CMat h = random_cmetric(rng, r);
    CVec x = random_cvec(rng, 6), y = random_cvec(rng, 6);
    cd fs = hat_inner_integral_fs(x, y, h, d).value();
    auto g = [&](const CVec& lam) {
      CVec l = power_covector(lam, d);
      cd q = (lam.transpose() * h.inverse() * lam.conjugate())(0, 0);
      return (l.transpose() * x)(0, 0) * std::conj((l.transpose() * y)(0, 0)) / std::pow(q.real(), d);
    };
    cd oracle = fs_quadrature(g, h);
    CHECK(std::abs(fs - oracle) < 1e-9 * std::abs(oracle) + 1e-12);
    cd expected = c_constant(r, d).value() * (y.adjoint() * sym_metric(h, d) * x)(0, 0);
    CHECK(std::abs(fs - expected) < 1e-9 * std::abs(expected));
    CHECK(std::abs(hat_inner_integral(x, y, h, d).value() - fs * double(d * d)) < 1e-9 * std::abs(fs) * d * d);
  }
}

TEST_CASE("hat_inner_integral is GL-equivariant") {
  Rng rng(23);
  QMat h = random_qmetric(rng, 2);
  QMat A = random_qmat(rng, 2, 2);
  while (determinant_of(A).is_zero()) A = random_qmat(rng, 2, 2);
  const int d = 3;
  QVec v = random_qvec(rng, 4), w = random_qvec(rng, 4);
  // <Sym^d A u, Sym^d A u'>_h = <u, u'>_{A^† h A}
  QMat hA = matmul(adjoint_of(A), matmul(h, A));
  QMat SA = sym_rep(A, d);
  QVec Av = matmul(SA, QMat(v)).col(0), Aw = matmul(SA, QMat(w)).col(0);
  CHECK(hat_inner_integral(v, w, hA, d).coeff == hat_inner_integral(Av, Aw, h, d).coeff);
}

TEST_CASE("pushforward_endo examples") {
  QMat I2 = identity_of<QComplex>(2);
  auto one = HomogeneousFiberFunction<QComplex>::constant(I2, qc(1));
  for (int d = 1; d <= 3; ++d) CHECK(pushforward_endo(one, d) == identity_of<QComplex>(d + 1));
  HomogeneousFiberFunction<QComplex> f;
  f.order = 1;
  f.metric = I2;
  f.coeffs = zeros_of<QComplex>(2, 2);
  f.coeffs(0, 0) = qc(1);
  QMat psi = pushforward_endo(f, 1);
  CHECK(psi(0, 0) == qc(2, 3));
  CHECK(psi(1, 1) == qc(1, 3));
  CHECK(psi(0, 1).is_zero());
  f.coeffs(0, 1) = qc(1);
  CHECK_THROWS_AS(pushforward_endo(f, 1), DomainError);
}

TEST_CASE("pushforward_endo is linear and hermitian") {
  Rng rng(24);
  QMat h = random_qmetric(rng, 2);
  const int d = 2;
  auto rand_real = [&](int N) {
    HomogeneousFiberFunction<QComplex> f;
    f.order = N;
    f.metric = h;
    QMat x = random_qmat(rng, N + 1, N + 1);
    f.coeffs = x + adjoint_of(x);
    return f;
  };
  auto f = rand_real(2), g = rand_real(2);
  HomogeneousFiberFunction<QComplex> s = f;
  s.coeffs = f.coeffs * qc(3) + g.coeffs * qc(-2, 7);
  QMat lhs = pushforward_endo(s, d);
  QMat rhs = pushforward_endo(f, d) * qc(3) + pushforward_endo(g, d) * qc(-2, 7);
  CHECK(lhs == rhs);
  QMat H = sym_metric(h, d);
  QMat Hp = matmul(H, pushforward_endo(f, d));
  CHECK(Hp == adjoint_of(Hp));
}

TEST_CASE("f_of_phi: identity, S^d A oracle, integral identity") {
  Rng rng(25);
  QMat h = random_qmetric(rng, 2);
  auto F1 = f_of_phi(identity_of<QComplex>(3), h, 2);
  CMat hc = to_cmat(h);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(F1.evaluate(random_cvec(rng, 2)) - 1.0) < 1e-12);

  const int d = 3;
  CMat A = random_h_hermitian(rng, hc);
  CMat SA = sym_lie(A, d);
  auto F = f_of_phi(SA, hc, d);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    CVec lam = random_cvec(rng, 2);
    CVec u = hc.inverse() * lam.conjugate();  // vector dual to ξ
    cd direct = double(d) * (u.adjoint() * hc * A * u)(0, 0) / (u.adjoint() * hc * u)(0, 0);
    worst = std::max(worst, std::abs(F.evaluate(lam) - direct));
    cd via_projector = (lambda_d_dual(lam, sym_metric(hc, d), d) * SA).trace();
    worst = std::max(worst, std::abs(F.evaluate(lam) - via_projector));
  }
  CHECK(worst < 1e-10);

  for (int r = 2; r <= 3; ++r) {
    QMat hq = random_qmetric(rng, r);
    const int dd = 2;
    const int R = static_cast<int>(sym_dim(r, dd));
    QMat phi = random_qmat(rng, R, R);
    FiberMoments<QComplex> mom(hq);
    CHECK(integrate(f_of_phi(phi, hq, dd), mom) == trace_of(phi) * QComplex(c_constant_coeff(r, dd)));
  }
}

TEST_CASE("delta_tilde: constants, Stokes, explicit and chart oracles") {
  Rng rng(26);
  QMat I2 = identity_of<QComplex>(2);
  auto one = HomogeneousFiberFunction<QComplex>::constant(I2, qc(5));
  CHECK(delta_tilde(one, 2).coeffs == zeros_of<QComplex>(1, 1));
  // f = |λ_1|²/|λ|² on the unit form: Λ i∂∂̄ f = 1 - 2f = (|λ_2|² - |λ_1|²)/|λ|²
  HomogeneousFiberFunction<QComplex> f;
  f.order = 1;
  f.metric = I2;
  f.coeffs = zeros_of<QComplex>(2, 2);
  f.coeffs(0, 0) = qc(1);
  for (int d = 1; d <= 3; ++d) {
    auto df = delta_tilde(f, d);
    CHECK(df.coeffs(0, 0) == qc(1, d));
    CHECK(df.coeffs(1, 1) == qc(-1, d));
    CHECK(df.coeffs(0, 1).is_zero());
  }
  for (int trial = 0; trial < 4; ++trial) {
    int r = 2 + trial % 2;
    QMat h = random_qmetric(rng, r);
    HomogeneousFiberFunction<QComplex> g;
    g.order = 2;
    g.metric = h;
    g.coeffs = random_qmat(rng, static_cast<int>(sym_dim(r, 2)), static_cast<int>(sym_dim(r, 2)));
    FiberMoments<QComplex> mom(h);
    CHECK(integrate(delta_tilde(g, 3), mom).is_zero());
  }
  // chart finite-difference oracle on a general metric
  CMat h = random_cmetric(rng, 2);
  HomogeneousFiberFunction<cd> g;
  g.order = 2;
  g.metric = h;
  CMat x = random_cmat(rng, 3, 3);
  g.coeffs = x + x.adjoint();
  const int d = 2;
  auto dg = delta_tilde(g, d);
  for (int i = 0; i < 5; ++i) {
    cd z = random_cvec(rng, 1)(0) * 0.7;
    auto fz = [&](cd w) {
      CVec l(2);
      l << w, 1.0;
      return g.evaluate(l).real();
    };
    CVec l(2);
    l << z, 1.0;
    double oracle = -chart_laplacian(fz, h, z) / d;
    CHECK(dg.evaluate(l).real() == doctest::Approx(oracle).epsilon(1e-5));
  }
}

TEST_CASE("T operator laws, exact") {
  Rng rng(27);
  for (int d = 1; d <= 3; ++d) {
    QMat h = random_qmetric(rng, 2);
    QMat T = t_operator(h, d);
    const int R = d + 1;
    QMat id = identity_of<QComplex>(R);
    QVec vid(R * R);
    for (int j = 0; j < R; ++j)
      for (int i = 0; i < R; ++i) vid(i + j * R) = id(i, j);
    CHECK(matmul(T, QMat(vid)) == QMat(vid));
    for (int trial = 0; trial < 3; ++trial) {
      QMat A = random_qmat(rng, 2, 2);
      QMat SA = sym_lie(A, d);
      QVec v(R * R);
      for (int j = 0; j < R; ++j)
        for (int i = 0; i < R; ++i) v(i + j * R) = SA(i, j);
      CHECK(matmul(T, QMat(v)) == QMat(v));
      // trace preservation on an arbitrary Φ
      QMat phi = random_qmat(rng, R, R);
      QVec p(R * R);
      for (int j = 0; j < R; ++j)
        for (int i = 0; i < R; ++i) p(i + j * R) = phi(i, j);
      QVec tp = matmul(T, QMat(p)).col(0);
      QComplex tr_in(0), tr_out(0);
      for (int i = 0; i < R; ++i) {
        tr_in += p(i + i * R);
        tr_out += tp(i + i * R);
      }
      CHECK(tr_in == tr_out);
    }
  }
}

TEST_CASE("T preserves hermiticity") {
  Rng rng(28);
  CMat h = random_cmetric(rng, 3);
  const int d = 2;
  CMat T = t_operator(h, d);
  CMat H = sym_metric(h, d);
  for (int trial = 0; trial < 3; ++trial) {
    CMat phi = random_h_hermitian(rng, H);
    CMat out = apply_operator(T, phi);
    CMat Ho = H * out;
    CHECK((Ho - Ho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("T spectrum for r = 2 matches the spin ladder") {
  // On the spin-ℓ component T acts by (1 + ℓ(ℓ+1)/d) d!(d+1)! / ((d+ℓ+1)!(d-ℓ)!),
  // multiplicity 2ℓ+1; ℓ = 0, 1 give 1.
  for (int d = 1; d <= 4; ++d) {
    CMat T = to_cmat(t_operator(identity_of<QComplex>(2), d));
    Eigen::ComplexEigenSolver<CMat> es(T);
    std::vector<double> got, want;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-10);
      got.push_back(es.eigenvalues()(i).real());
    }
    for (int l = 0; l <= d; ++l) {
      double val = (1.0 + l * (l + 1.0) / d) * (factorial(d) * factorial(d + 1) / (factorial(d + l + 1) * factorial(d - l))).convert_to<double>();
      for (int m = 0; m < 2 * l + 1; ++m) want.push_back(val);
    }
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("fixed_space_projector splits off S^d(End V)") {
  Rng rng(29);
  const std::vector<std::pair<int, int>> cases{{2, 1}, {2, 2}, {2, 3}, {3, 2}};
  for (auto [r, d] : cases) {
    CMat h = random_cmetric(rng, r);
    CMat T = t_operator(h, d);
    FixedSpaceSplit split = fixed_space_projector(T, 1e-8, r * r);
    CHECK(split.kernel_dim == r * r);
    CHECK(split.gap > 1e-3);
    const int n = static_cast<int>(T.rows());
    CHECK((split.p_kernel + split.p_image - CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((split.p_kernel * split.p_kernel - split.p_kernel).cwiseAbs().maxCoeff() < 1e-9);
    CMat A = random_h_hermitian(rng, h);
    CMat SA = sym_lie(A, d);
    CMat proj = apply_operator(split.p_kernel, SA);
    CHECK((proj - SA).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, SA.cwiseAbs().maxCoeff()));
    CMat phi = random_cmat(rng, static_cast<int>(SA.rows()), static_cast<int>(SA.rows()));
    CMat defect = phi - apply_operator(T, phi);
    CHECK(std::abs(defect.trace()) < 1e-10 * phi.cwiseAbs().maxCoeff());
  }
  CMat T = t_operator(CMat(CMat::Identity(2, 2)), 2);
  CHECK_THROWS_AS(fixed_space_projector(T, 1e-8, 3), AmbiguityError);
}

TEST_CASE("hatted_pairing quadrature: Sym^d h fixed, GL naturality, non-power H") {
  Rng rng(41);
  for (auto [r, d] : {std::pair{2, 1}, {2, 2}, {2, 3}, {3, 2}}) {
    CMat h = random_cmetric(rng, r);
    CMat H = sym_metric(h, d);
    PairingQuadrature q;
    if (r == 3) q.tol = 1e-11;
    auto P = hatted_pairing(H, r, d, q);
    CHECK((P.pairing - H).cwiseAbs().maxCoeff() < 1e-10 * H.cwiseAbs().maxCoeff());
  }
  // naturality on a form that is not a symmetric power
  const int r = 2, d = 2;
  CMat H = CMat::Identity(3, 3);
  H(1, 1) = 2.0;
  CMat A = random_cmat(rng, r, r) + 2.0 * CMat::Identity(r, r);
  CMat S = sym_rep(A, d);
  CMat lhs = hatted_pairing(CMat(S.adjoint() * H * S), r, d).pairing;
  CMat rhs = S.adjoint() * hatted_pairing(H, r, d).pairing * S;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * rhs.cwiseAbs().maxCoeff());
  CMat P = hatted_pairing(H, r, d).pairing;
  CHECK(hermitian_defect(P) < 1e-14);
  CHECK((P - H).cwiseAbs().maxCoeff() > 1e-3);
  PairingQuadrature tiny;
  tiny.cap = 24;
  CHECK_THROWS_AS(hatted_pairing(H, r, d, tiny), PrecisionError);
}
