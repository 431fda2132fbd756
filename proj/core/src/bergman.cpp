#include "projbal/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "projbal/errors.hpp"
#include "projbal/fibercalc.hpp"
#include "projbal/linalg.hpp"
#include "projbal/quadrature.hpp"
#include "projbal/sympower.hpp"

namespace projbal {

namespace {

constexpr double kTau = 2 * std::numbers::pi;

double binom(int n, int p) {
  double out = 1.0;
  for (int j = 1; j <= p; ++j) out = out * (n - p + j) / j;
  return out;
}

// u^p σ^k = t^p (1-t)^{k-p} e^{-kψ}
double section_weight(int p, int k, double t, double psi) {
  return std::pow(t, p) * std::pow(1 - t, k - p) * std::exp(-k * psi);
}

int start_nodes(const QuadratureOptions& q, int k) { return q.start > 0 ? q.start : std::max(32, k + 16); }

// Node doubling on an assembled quantity until the relative change drops below tol.
template <class Assemble>
auto converge(Assemble assemble, int n, const QuadratureOptions& q, const char* who, int* used) {
  auto prev = assemble(n);
  while (true) {
    if (2 * n > q.cap)
      throw PrecisionError(std::string(who) + ": quadrature not stabilised within the node cap (" + std::to_string(q.cap) + ")");
    n *= 2;
    auto next = assemble(n);
    const double scale = next.cwiseAbs().maxCoeff();
    if ((next - prev).cwiseAbs().maxCoeff() <= q.tol * scale) {
      if (used) *used = n;
      return next;
    }
    prev = std::move(next);
  }
}

std::vector<std::vector<int>> by_p(const SectionBasis& basis) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(basis.max_p() + 1));
  for (int j = 0; j < basis.size(); ++j) out[static_cast<std::size_t>(basis.sections[static_cast<std::size_t>(j)].p)].push_back(j);
  return out;
}

// Σ_i s_i s_i^† at t (σ^k included), given the inverse Gram.
CMat kernel_at(const SectionBasis& basis, const std::vector<std::vector<int>>& groups, const CMat& ginv, const BaseKahler& base,
               double t) {
  const int R = basis.fiber.size();
  const double psi = base.weight(t);
  CMat out = CMat::Zero(R, R);
  for (std::size_t p = 0; p < groups.size(); ++p) {
    const double w = section_weight(static_cast<int>(p), basis.k, t, psi);
    for (int a : groups[p])
      for (int b : groups[p]) {
        const auto& sa = basis.sections[static_cast<std::size_t>(a)];
        const auto& sb = basis.sections[static_cast<std::size_t>(b)];
        out(sa.alpha, sb.alpha) += w * sa.scale * sb.scale * ginv(a, b);
      }
  }
  return out;
}

double max_abs(const CMat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

bool same_poly(const Poly& a, const Poly& b) {
  const std::size_t n = std::max(a.c.size(), b.c.size());
  for (std::size_t j = 0; j < n; ++j) {
    double x = j < a.c.size() ? a.c[j] : 0.0, y = j < b.c.size() ? b.c[j] : 0.0;
    if (x != y) return false;
  }
  return true;
}

void require_scalar_bundle(const SplitBundleModel& E, const char* who) {
  E.validate();
  for (const auto& s : E.summands)
    if (s.degree != E.summands[0].degree || !same_poly(s.weight, E.summands[0].weight))
      throw UnsupportedInput(std::string(who) + ": only E = O(a)^{⊕r} with a common weight is supported");
}

std::vector<double> grid(int n) {
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) / n);
  return out;
}

}  // namespace

int SectionBasis::max_p() const {
  int out = -1;
  for (const auto& s : sections) out = std::max(out, s.p);
  return out;
}

SectionBasis section_basis(const SplitBundleModel& E, int d, int k) {
  if (k < 0) throw DomainError("section_basis: k must be >= 0");
  if (d < 0) throw DomainError("section_basis: d must be >= 0");
  E.validate();
  SectionBasis out;
  out.r = E.rank();
  out.d = d;
  out.k = k;
  out.fiber = MonomialBasis(E.rank(), d);
  for (int a = 0; a < out.fiber.size(); ++a) {
    int n = k;
    for (int i = 0; i < out.r; ++i) n += out.fiber[a][i] * E.summands[static_cast<std::size_t>(i)].degree;
    out.n_alpha.push_back(n);
    for (int p = 0; p <= n; ++p) out.sections.push_back({a, p, std::sqrt(binom(n, p))});
  }
  if (out.sections.empty()) throw EmptySpaceError("section_basis: every summand of Sym^d E ⊗ L^k has negative degree");
  return out;
}

PointwiseMetric sym_d_h_metric(const SplitBundleModel& E, int d) {
  return [E, d](double t) { return sym_metric(E.metric(t), d); };
}

int h_of_k_threshold(const SplitBundleModel& E, const BaseKahler& base, int d) {
  double worst = 0.0;
  for (double t : grid(400)) {
    CMat p0 = psi_pair(E, base, d, t).second;
    for (Eigen::Index i = 0; i < p0.rows(); ++i) worst = std::min(worst, p0(i, i).real());
  }
  // 1 + ψ/k > 0  ⇔  k > -ψ
  return worst >= 0.0 ? 1 : static_cast<int>(std::floor(-worst)) + 1;
}

PointwiseMetric metric_h_of_k(const SplitBundleModel& E, const BaseKahler& base, int d, int k) {
  const int need = h_of_k_threshold(E, base, d);
  if (k < need) throw ThresholdError("metric_h_of_k: h(k) is indefinite for k = " + std::to_string(k), need);
  return [E, base, d, k](double t) {
    auto [p1, p0] = psi_pair(E, base, d, t);
    return CMat(sym_metric(E.metric(t), d) * (p1 + p0 / static_cast<double>(k)));
  };
}

PointwiseMetric h_t_phi_metric(PointwiseMetric m, std::function<CMat(double)> phi, double t) {
  return [m = std::move(m), phi = std::move(phi), t](double s) {
    CMat M = m(s);
    return CMat(M * (CMat::Identity(M.rows(), M.cols()) + t * phi(s)));
  };
}

GramMatrix gram(const SectionBasis& basis, const PointwiseMetric& metric, const std::string& variant, const BaseKahler& base,
                const QuadratureOptions& q) {
  const int N = basis.size();
  const auto groups = by_p(basis);
  auto assemble = [&](int n) {
    const UnitRule& rule = gauss_legendre_unit(n);
    CMat G = CMat::Zero(N, N);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      const double bw = kTau * rule.weights[i] * base.theta_prime(t);
      const double psi = base.weight(t);
      CMat M = metric(t);
      for (std::size_t p = 0; p < groups.size(); ++p) {
        const double w = bw * section_weight(static_cast<int>(p), basis.k, t, psi);
        for (int a : groups[p])
          for (int b : groups[p]) {
            const auto& sa = basis.sections[static_cast<std::size_t>(a)];
            const auto& sb = basis.sections[static_cast<std::size_t>(b)];
            G(b, a) += w * sa.scale * sb.scale * M(sb.alpha, sa.alpha);
          }
      }
    }
    return G;
  };
  GramMatrix out;
  out.variant = variant;
  out.m = converge(assemble, start_nodes(q, basis.k), q, "gram", &out.nodes);
  out.m = 0.5 * (out.m + out.m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(out.m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

CMat BergmanRecord::beta(std::size_t i) const { return kTau * btilde.at(i); }

BergmanRecord bergman_endo(const GramMatrix& g, const SectionBasis& basis, const BaseKahler& base, PointwiseMetric variant_metric,
                           PointwiseMetric ref_metric, const std::vector<double>& nodes, const GramMatrix* gram_ref) {
  if (!(g.condition <= 1e12)) throw ConditioningError("bergman_endo: Gram condition number exceeds 1e12", g.condition);
  BergmanRecord rec;
  rec.r = basis.r;
  rec.d = basis.d;
  rec.k = basis.k;
  rec.basis = basis;
  rec.gram = g;
  rec.base = base;
  rec.variant_metric = variant_metric;
  rec.ref_metric = ref_metric;
  rec.nodes = nodes;
  const auto groups = by_p(basis);
  const int N = basis.size();
  Eigen::LLT<CMat> llt(g.m);
  if (llt.info() != Eigen::Success) throw ConditioningError("bergman_endo: Gram is not positive-definite", g.condition);
  const CMat ginv = llt.solve(CMat::Identity(N, N));
  CMat ginv_ref;
  if (gram_ref) {
    if (!(gram_ref->condition <= 1e12)) throw ConditioningError("bergman_endo: reference Gram condition exceeds 1e12", gram_ref->condition);
    ginv_ref = gram_ref->m.llt().solve(CMat::Identity(N, N));
  }
  for (double t : nodes) {
    CMat K = kernel_at(basis, groups, ginv, base, t);
    CMat Mref = ref_metric(t), Mvar = variant_metric(t);
    CMat bt = K * Mref;
    CMat bv = K * Mvar;
    CMat psi = Mref.inverse() * Mvar;
    rec.identity_deviation = std::max(rec.identity_deviation, max_abs(bt - bv * psi.inverse()));
    rec.hermitian_defect = std::max(rec.hermitian_defect, hermitian_defect(CMat(Mref * bt)));
    rec.btilde.push_back(bt);
    rec.b_variant.push_back(bv);
    if (gram_ref) rec.b_sym.push_back(kernel_at(basis, groups, ginv_ref, base, t) * Mref);
  }
  const UnitRule& rule = gauss_legendre_unit(g.nodes);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const double w = kTau * rule.weights[i] * base.theta_prime(t);
    CMat K = kernel_at(basis, groups, ginv, base, t);
    rec.trace_integral += w * (K * variant_metric(t)).trace().real();
    if (gram_ref) rec.trace_integral_sym += w * (kernel_at(basis, groups, ginv_ref, base, t) * ref_metric(t)).trace().real();
  }
  return rec;
}

BergmanRecord bergman_record(const SplitBundleModel& E, const BaseKahler& base, int d, int k, const std::vector<double>& nodes,
                             const QuadratureOptions& q) {
  base.validate();
  SectionBasis basis = section_basis(E, d, k);
  PointwiseMetric hk = metric_h_of_k(E, base, d, k);
  PointwiseMetric sym = sym_d_h_metric(E, d);
  GramMatrix g = gram(basis, hk, "h(k)", base, q);
  GramMatrix gs = gram(basis, sym, "Sym^d h", base, q);
  return bergman_endo(g, basis, base, hk, sym, nodes, &gs);
}

std::vector<QMat> bergman_exact_fs(const SplitBundleModel& E, const BaseKahler& base, int d, int k, const std::vector<Rational>& nodes) {
  if (!base.weight.is_zero()) throw UnsupportedInput("bergman_exact_fs: base must be Fubini–Study");
  for (const auto& s : E.summands)
    if (!s.weight.is_zero()) throw UnsupportedInput("bergman_exact_fs: summand metrics must be Fubini–Study");
  SectionBasis basis = section_basis(E, d, k);
  const int r = basis.r, R = basis.fiber.size();
  int sum_a = 0;
  for (const auto& s : E.summands) sum_a += s.degree;
  // Ψ_0 = d/(r+d)(S^d ΛF + tr ΛF), ΛF_i = a_i for FS data
  std::vector<Rational> psi0(static_cast<std::size_t>(R));
  for (int a = 0; a < R; ++a)
    psi0[static_cast<std::size_t>(a)] = Rational(d, r + d) * Rational(basis.n_alpha[static_cast<std::size_t>(a)] - k + sum_a);
  // Gram / 2π: (α!/d!)(1 + Ψ_0/k) binom(n,p) B(p+1, n-p+1)
  std::vector<Rational> g(basis.sections.size());
  QMat h0 = zeros_of<QComplex>(r, r);
  for (int i = 0; i < r; ++i) h0(i, i) = QComplex(1);
  const QMat M0 = sym_metric(h0, d);
  for (std::size_t j = 0; j < basis.sections.size(); ++j) {
    const auto& s = basis.sections[j];
    const int n = basis.n_alpha[static_cast<std::size_t>(s.alpha)];
    Rational b = factorial(n) / (factorial(s.p) * factorial(n - s.p));
    Rational beta_fn = factorial(s.p) * factorial(n - s.p) / factorial(n + 1);
    Rational one_plus = k == 0 ? Rational(1) : Rational(1) + psi0[static_cast<std::size_t>(s.alpha)] / k;
    g[j] = real_of(M0(s.alpha, s.alpha)) * one_plus * b * beta_fn;
  }
  std::vector<QMat> out;
  for (const Rational& t : nodes) {
    if (t < 0 || t >= 1) throw DomainError("bergman_exact_fs: nodes must lie in [0, 1)");
    QMat h = zeros_of<QComplex>(r, r);
    for (int i = 0; i < r; ++i) {
      Rational v = 1;
      for (int e = 0; e < E.summands[static_cast<std::size_t>(i)].degree; ++e) v *= (1 - t);
      h(i, i) = QComplex(v);
    }
    const QMat Mref = sym_metric(h, d);
    QMat K = zeros_of<QComplex>(R, R);
    for (std::size_t j = 0; j < basis.sections.size(); ++j) {
      const auto& s = basis.sections[j];
      Rational w = 1;
      for (int e = 0; e < s.p; ++e) w *= t;
      for (int e = 0; e < k - s.p; ++e) w *= (1 - t);
      for (int e = 0; e < s.p - k; ++e) w /= (1 - t);
      Rational b = factorial(basis.n_alpha[static_cast<std::size_t>(s.alpha)]) /
                   (factorial(s.p) * factorial(basis.n_alpha[static_cast<std::size_t>(s.alpha)] - s.p));
      K(s.alpha, s.alpha) = K(s.alpha, s.alpha) + QComplex(w * b / g[j]);
    }
    out.push_back(matmul(K, Mref));
  }
  return out;
}

std::vector<CVec> fiber_sample_points(int r, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  if (2 * r > 8) throw UnsupportedInput("fiber_sample_points: r <= 4");
  auto halton = [](int i, int b) {
    double f = 1.0, x = 0.0;
    while (i > 0) {
      f /= b;
      x += f * (i % b);
      i /= b;
    }
    return x;
  };
  std::vector<CVec> out;
  for (int i = 0; i < r && static_cast<int>(out.size()) < count; ++i) out.push_back(CVec::Unit(r, i));
  for (int idx = 1; static_cast<int>(out.size()) < count; ++idx) {
    CVec v(r);
    for (int i = 0; i < r; ++i) {
      double u1 = halton(idx, primes[2 * i]), u2 = halton(idx, primes[2 * i + 1]);
      v(i) = std::sqrt(-2 * std::log(u1)) * std::polar(1.0, kTau * u2);
    }
    out.push_back(v / v.norm());
  }
  return out;
}

RhoCheck rho_identity_check(const BergmanRecord& rec, const std::vector<CVec>& points) {
  RhoCheck out;
  const SectionBasis& basis = rec.basis;
  const int N = basis.size(), R = basis.fiber.size();
  const double C = c_constant(rec.r, rec.d).value().real();
  // orthonormal sections s_i = Σ_j W(j, i) σ_j with W = L^{-†}
  Eigen::LLT<CMat> llt(rec.gram.m);
  const CMat W = CMat(llt.matrixU()).inverse();
  for (std::size_t n = 0; n < rec.nodes.size(); ++n) {
    const double t = rec.nodes[n];
    const double psi = rec.base.weight(t);
    CMat vals = CMat::Zero(R, N);  // column j: value of basis section j, σ^{k/2} absorbed
    for (int j = 0; j < N; ++j) {
      const auto& s = basis.sections[static_cast<std::size_t>(j)];
      vals(s.alpha, j) = s.scale * std::sqrt(section_weight(s.p, basis.k, t, psi));
    }
    const CMat S = vals * W;
    const CMat H = rec.ref_metric(t);
    const CMat Hinv = H.inverse();
    for (const CVec& lam : points) {
      CVec ell = power_covector(lam, rec.d);
      const double norm = (ell.transpose() * Hinv * ell.conjugate())(0).real();
      double lhs = 0.0;
      for (int i = 0; i < N; ++i) lhs += std::norm((ell.transpose() * S.col(i))(0));
      lhs /= norm;
      const double rhs = (lambda_d_dual(lam, H, rec.d) * rec.btilde[n]).trace().real();
      out.rho.push_back(rhs / C);
      out.max_deviation = std::max(out.max_deviation, std::abs(lhs - rhs) / C);
    }
  }
  return out;
}

ExpansionFit fit_expansion(const std::vector<BergmanRecord>& records) {
  if (records.size() < 3) throw DomainError("fit_expansion: need at least 3 ladder values");
  std::vector<const BergmanRecord*> recs;
  for (const auto& r : records) recs.push_back(&r);
  std::sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->k < b->k; });
  const std::size_t nodes = recs[0]->nodes.size();
  for (auto* r : recs)
    if (r->nodes != recs[0]->nodes) throw DomainError("fit_expansion: records sampled at different nodes");
  ExpansionFit out;
  const double m = static_cast<double>(recs.size());
  double sx = 0.0, sxx = 0.0;
  for (auto* r : recs) {
    out.ks.push_back(r->k);
    sx += 1.0 / r->k;
    sxx += 1.0 / (static_cast<double>(r->k) * r->k);
  }
  const double det = m * sxx - sx * sx;
  out.distance.assign(recs.size(), 0.0);
  for (std::size_t n = 0; n < nodes; ++n) {
    const auto R = recs[0]->btilde[n].rows();
    std::vector<CMat> ys;
    CMat sy = CMat::Zero(R, R), sxy = CMat::Zero(R, R);
    for (auto* r : recs) {
      CMat y = r->beta(n) - static_cast<double>(r->k) * CMat::Identity(R, R);
      sy += y;
      sxy += y / static_cast<double>(r->k);
      ys.push_back(y);
    }
    CMat a = (sxx * sy - sx * sxy) / det;
    CMat b = (m * sxy - sx * sy) / det;
    CMat ss = CMat::Zero(R, R);
    for (std::size_t j = 0; j < recs.size(); ++j) {
      CMat e = ys[j] - a - b / static_cast<double>(recs[j]->k);
      ss += e.cwiseAbs2().cast<cd>();
      out.distance[j] = std::max(out.distance[j], max_abs(ys[j] - a));
    }
    out.residual = std::max(out.residual, std::sqrt(ss.real().maxCoeff() / m));
    out.a1.push_back(a);
    out.slope.push_back(b);
  }
  for (std::size_t j = 1; j < out.distance.size(); ++j)
    if (out.distance[j] > out.distance[j - 1] * (1 + 1e-12) + 1e-15) out.warning = true;
  return out;
}

BergmanRecord perturbed_bergman(const SplitBundleModel& E, const BaseKahler& base, int d, int k,
                                const std::function<CMat(double)>& phi, const std::vector<double>& nodes, const QuadratureOptions& q) {
  const auto probe = grid(400);
  const bool zero = std::all_of(probe.begin(), probe.end(), [&](double t) { return max_abs(phi(t)) == 0.0; });
  if (zero) return bergman_record(E, base, d, k, nodes, q);
  require_scalar_bundle(E, "perturbed_bergman");
  base.validate();
  const int r = E.rank();
  const CMat M0 = sym_metric(CMat(CMat::Identity(r, r)), d);
  const auto R = M0.rows();
  for (double t : probe) {
    CMat f = phi(t);
    if (f.rows() != R || f.cols() != R) throw DomainError("perturbed_bergman: Φ has the wrong size");
    if (hermitian_defect(CMat(M0 * f)) > 1e-10 * std::max(1.0, max_abs(f)))
      throw DomainError("perturbed_bergman: Φ is not hermitian for Sym^d h");
  }
  auto positive_at = [&](int kk) {
    for (double t : probe) {
      Eigen::SelfAdjointEigenSolver<CMat> es(CMat(M0 * (CMat::Identity(R, R) + phi(t) / static_cast<double>(kk))),
                                             Eigen::EigenvaluesOnly);
      if (!(es.eigenvalues().minCoeff() > 0.0)) return false;
    }
    return true;
  };
  if (!positive_at(k)) {
    int need = k + 1;
    while (!positive_at(need)) {
      if (need > 1000000) throw ThresholdError("perturbed_bergman: no positive threshold found", -1);
      need *= 2;
    }
    throw ThresholdError("perturbed_bergman: Sym^d h(I + Φ/k) is indefinite for k = " + std::to_string(k), need);
  }
  const LineBundleMetricModel& h1 = E.summands[0];
  const double kk = static_cast<double>(k);
  PointwiseMetric ref = [=](double t) {
    return CMat(std::pow(h1.metric(t), d) * M0 * (CMat::Identity(R, R) + phi(t) / kk));
  };
  // The fiber pairing only depends on Φ(t); constant Φ hits the memo every time.
  struct Memo {
    CMat key, value;
  };
  auto memo = std::make_shared<Memo>();
  PointwiseMetric variant = [=](double t) {
    CMat f = phi(t);
    if (memo->key.size() == 0 || f != memo->key) {
      memo->key = f;
      memo->value = hatted_pairing(CMat(M0 * (CMat::Identity(R, R) + f / kk)), r, d).pairing;
    }
    const double vol = 1 + d * lambda_curvature(h1, base, t) / kk;
    return CMat(vol * std::pow(h1.metric(t), d) * memo->value);
  };
  SectionBasis basis = section_basis(E, d, k);
  GramMatrix g = gram(basis, variant, "h(k,Phi)", base, q);
  GramMatrix gs = gram(basis, sym_d_h_metric(E, d), "Sym^d h", base, q);
  BergmanRecord rec = bergman_endo(g, basis, base, variant, ref, nodes, &gs);
  for (double t : nodes) {
    CMat T = t_operator(E.metric(t), d);
    CMat psi0 = psi_pair(E, base, d, t).second;
    CMat first = sym_metric(E.metric(t), d) * (CMat::Identity(R, R) + (apply_operator(T, phi(t)) + psi0) / kk);
    CMat exact = variant(t);
    rec.first_order_defect = std::max(rec.first_order_defect, max_abs(exact - first) / max_abs(exact));
  }
  return rec;
}

AlmostBalanced almost_balanced_gram(const SplitBundleModel& E, const BaseKahler& base, int d, int k) {
  require_scalar_bundle(E, "almost_balanced_gram");
  base.validate();
  const int r = E.rank();
  const LineBundleMetricModel& h1 = E.summands[0];
  const int a = h1.degree;
  const int n = d * a + k;
  if (n < 0) throw EmptySpaceError("almost_balanced_gram: no sections");
  AlmostBalanced out;
  out.k = k;
  out.guarantee = base.weight.is_zero() && h1.weight.is_zero();
  const double K = std::pow(static_cast<double>(d), r - 1) * c_constant(r, d).value().real();
  const int R = static_cast<int>(sym_dim(r, d));
  QuadratureOptions q;

  // base factor of |z^p ê_α|² with the binomial scale: binom(n,p) t^p (1-t)^{n-p} e^{-dφ - kψ}
  auto section = [&](int p, double t) {
    return binom(n, p) * std::pow(t, p) * std::pow(1 - t, n - p) * std::exp(-d * h1.weight(t) - k * base.weight(t));
  };
  auto density = [&](double t) { return k + d * lambda_curvature(h1, base, t); };

  // γ_p = ∫ |σ_p|² (k + dΛF) ω
  auto gamma_at = [&](int nodes) {
    const UnitRule& rule = gauss_legendre_unit(nodes);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 1);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      const double w = kTau * rule.weights[i] * base.theta_prime(t) * density(t);
      for (int p = 0; p <= n; ++p) g(p) += w * section(p, t);
    }
    return g;
  };
  const Eigen::VectorXd gamma = converge(gamma_at, start_nodes(q, k), q, "almost_balanced_gram", nullptr);

  // ρ_b = Σ_p |σ_p|²/γ_p and the first two t-derivatives of log ρ_b
  auto log_rho_derivs = [&](double t, double& rho, double& l1, double& l2) {
    double S = 0.0, S1 = 0.0, S2 = 0.0;
    for (int p = 0; p <= n; ++p) {
      const double c = binom(n, p) / gamma(p);
      const double tp = std::pow(t, p), sp = std::pow(1 - t, n - p);
      const double dtp = p >= 1 ? p * std::pow(t, p - 1) : 0.0;
      const double ddtp = p >= 2 ? p * (p - 1) * std::pow(t, p - 2) : 0.0;
      const double dsp = n - p >= 1 ? -(n - p) * std::pow(1 - t, n - p - 1) : 0.0;
      const double ddsp = n - p >= 2 ? (n - p) * (n - p - 1) * std::pow(1 - t, n - p - 2) : 0.0;
      S += c * tp * sp;
      S1 += c * (dtp * sp + tp * dsp);
      S2 += c * (ddtp * sp + 2 * dtp * dsp + tp * ddsp);
    }
    Poly e = h1.weight;  // log of the exponential factor is -(dφ + kψ)
    Poly f;
    const std::size_t len = std::max(e.c.size(), base.weight.c.size());
    f.c.assign(len, 0.0);
    for (std::size_t j = 0; j < e.c.size(); ++j) f.c[j] -= d * e.c[j];
    for (std::size_t j = 0; j < base.weight.c.size(); ++j) f.c[j] -= k * base.weight.c[j];
    Poly f1 = f.derivative(), f2 = f1.derivative();
    rho = S * std::exp(f(t));
    l1 = S1 / S + f1(t);
    l2 = S2 / S - (S1 / S) * (S1 / S) + f2(t);
  };

  // Gram'_p = (1/γ_p) ∫ |σ_p|² (K/ρ) (k + dΛF + Λ i∂∂̄ log ρ) ω ; ρ = ρ_b / K
  auto gram_at = [&](int nodes) {
    const UnitRule& rule = gauss_legendre_unit(nodes);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n + 1);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      double rho, l1, l2;
      log_rho_derivs(t, rho, l1, l2);
      const double w = density(t) + radial_laplacian(t, l1, l2, base);
      const double bw = kTau * rule.weights[i] * base.theta_prime(t) * K / rho * w;
      for (int p = 0; p <= n; ++p) g(p) += bw * section(p, t) / gamma(p);
    }
    return g;
  };
  const Eigen::VectorXd gp = converge(gram_at, start_nodes(q, k), q, "almost_balanced_gram", nullptr);

  out.D = kTau * K * (k + d * a) / static_cast<double>(n + 1);
  out.D_limit = kTau * K;
  for (int p = 0; p <= n; ++p) {
    out.diag.push_back(gp(p));
    out.mult.push_back(R);
    out.trace_M += R * (gp(p) - out.D);
    out.op_norm_M = std::max(out.op_norm_M, std::abs(gp(p) - out.D));
  }
  return out;
}

}  // namespace projbal
