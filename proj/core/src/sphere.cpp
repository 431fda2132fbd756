#include "projbal/sphere.hpp"

#include <algorithm>
#include <cmath>

#include "projbal/errors.hpp"
#include "projbal/fibercalc.hpp"
#include "projbal/multi_index.hpp"
#include "projbal/quadrature.hpp"

namespace projbal {

double Poly::operator()(double t) const {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Poly Poly::derivative() const {
  Poly out;
  for (std::size_t j = 1; j < c.size(); ++j) out.c.push_back(static_cast<double>(j) * c[j]);
  return out;
}

bool Poly::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
}

int Poly::degree() const {
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
    if (c[static_cast<std::size_t>(j)] != 0.0) return j;
  return 0;
}

double LineBundleMetricModel::metric(double t) const { return std::pow(1.0 - t, degree) * std::exp(-weight(t)); }

double BaseKahler::theta(double t) const { return t + t * (1 - t) * weight.derivative()(t); }

double BaseKahler::theta_prime(double t) const {
  Poly p1 = weight.derivative(), p2 = p1.derivative();
  return 1 + (1 - 2 * t) * p1(t) + t * (1 - t) * p2(t);
}

double BaseKahler::theta_second(double t) const {
  Poly p1 = weight.derivative(), p2 = p1.derivative(), p3 = p2.derivative();
  return -2 * p1(t) + 2 * (1 - 2 * t) * p2(t) + t * (1 - t) * p3(t);
}

double BaseKahler::density(double t) const { return theta_prime(t) * (1 - t) * (1 - t); }

double BaseKahler::sigma(double t) const { return (1 - t) * std::exp(-weight(t)); }

void BaseKahler::validate() const {
  if (weight.degree() > kMaxWeightDegree) throw DomainError("BaseKahler: conformal weight degree exceeds 4");
  for (int i = 0; i <= 2000; ++i) {
    double t = i / 2000.0;
    if (!(theta_prime(t) > 0.0)) throw DomainError("BaseKahler: ω is not positive (Θ' <= 0 at t = " + std::to_string(t) + ")");
  }
}

void SplitBundleModel::validate() const {
  if (summands.empty()) throw DomainError("SplitBundleModel: rank must be >= 1");
  for (const auto& s : summands)
    if (s.weight.degree() > kMaxWeightDegree) throw DomainError("SplitBundleModel: weight degree exceeds 4");
}

CMat SplitBundleModel::metric(double t) const {
  CMat h = CMat::Zero(rank(), rank());
  for (int i = 0; i < rank(); ++i) h(i, i) = summands[static_cast<std::size_t>(i)].metric(t);
  return h;
}

double integrate_base(const std::function<double(double)>& f, const BaseKahler& base, int n) {
  const UnitRule& rule = gauss_legendre_unit(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.nodes[i];
    acc += rule.weights[i] * f(t) * base.theta_prime(t);
  }
  return 2 * M_PI * acc;
}

double radial_laplacian(double t, double fp, double fpp, const BaseKahler& base) {
  return ((1 - 2 * t) * fp + t * (1 - t) * fpp) / base.theta_prime(t);
}

double lambda_curvature(const LineBundleMetricModel& mdl, const BaseKahler& base, double t) {
  // Λ i∂∂̄(a log(1+u) + φ); log(1+u) = -log(1-t) has (t(1-t)·(1-t)^{-1})' = 1.
  Poly p1 = mdl.weight.derivative();
  Poly p2 = p1.derivative();
  return (mdl.degree + (1 - 2 * t) * p1(t) + t * (1 - t) * p2(t)) / base.theta_prime(t);
}

std::vector<double> lambda_curvature(const LineBundleMetricModel& mdl, const BaseKahler& base, const std::vector<double>& nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double t : nodes) out.push_back(lambda_curvature(mdl, base, t));
  return out;
}

double scalar_curvature(const BaseKahler& base, double t) {
  // S = -Λ i∂∂̄ log(density) = (2 - (t(1-t) Θ''/Θ')') / Θ'
  const double tp = base.theta_prime(t), ts = base.theta_second(t);
  Poly p1 = base.weight.derivative(), p2 = p1.derivative(), p3 = p2.derivative(), p4 = p3.derivative();
  const double t3 = -6 * p2(t) + 3 * (1 - 2 * t) * p3(t) + t * (1 - t) * p4(t);  // Θ'''
  const double g = ts / tp;
  const double gp = t3 / tp - g * g;
  const double inner = (1 - 2 * t) * g + t * (1 - t) * gp;
  return (2 - inner) / tp;
}

std::vector<double> scalar_curvature(const BaseKahler& base, const std::vector<double>& nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double t : nodes) out.push_back(scalar_curvature(base, t));
  return out;
}

std::vector<double> lambda_curvatures(const SplitBundleModel& E, const BaseKahler& base, double t) {
  std::vector<double> out;
  for (const auto& s : E.summands) out.push_back(lambda_curvature(s, base, t));
  return out;
}

double he_residual(const SplitBundleModel& E, const BaseKahler& base, const std::vector<double>& nodes) {
  const int r = E.rank();
  double total = 0.0;
  for (const auto& s : E.summands) total += integrate_base([&](double t) { return lambda_curvature(s, base, t); }, base);
  const double mu = total / (2 * M_PI * r);
  double worst = 0.0;
  for (double t : nodes)
    for (double x : lambda_curvatures(E, base, t)) worst = std::max(worst, std::abs(x - mu));
  return worst;
}

CMat sym_lie_diag(const std::vector<double>& x, int d) {
  MonomialBasis basis(static_cast<int>(x.size()), d);
  CMat out = CMat::Zero(basis.size(), basis.size());
  for (int a = 0; a < basis.size(); ++a) {
    double acc = 0.0;
    for (int i = 0; i < basis.rank(); ++i) acc += basis[a][i] * x[static_cast<std::size_t>(i)];
    out(a, a) = acc;
  }
  return out;
}

namespace {

CMat trace_free(const CMat& m) {
  const auto R = m.rows();
  return m - m.trace() / static_cast<double>(R) * CMat::Identity(R, R);
}

}  // namespace

CMat a1_endomorphism(const SplitBundleModel& E, const BaseKahler& base, int d, double t) {
  const int r = E.rank();
  CMat lf = sym_lie_diag(lambda_curvatures(E, base, t), d);
  const auto R = lf.rows();
  return static_cast<double>(r) / (r + d) * trace_free(lf) + 0.5 * scalar_curvature(base, t) * CMat::Identity(R, R);
}

std::pair<CMat, CMat> psi_pair(const SplitBundleModel& E, const BaseKahler& base, int d, double t) {
  const int r = E.rank();
  std::vector<double> lf = lambda_curvatures(E, base, t);
  CMat s = sym_lie_diag(lf, d);
  const auto R = s.rows();
  double tr = 0.0;
  for (double x : lf) tr += x;
  CMat psi0 = static_cast<double>(d) / (r + d) * (s + tr * CMat::Identity(R, R));
  return {CMat::Identity(R, R), psi0};
}

CMat psi0_via_fiber(const SplitBundleModel& E, const BaseKahler& base, int d, double t) {
  CMat h = E.metric(t);
  std::vector<double> lf = lambda_curvatures(E, base, t);
  HomogeneousFiberFunction<cd> f;
  f.order = 1;
  f.metric = h;
  f.coeffs = CMat::Zero(E.rank(), E.rank());
  for (int i = 0; i < E.rank(); ++i) f.coeffs(i, i) = d * lf[static_cast<std::size_t>(i)] / h(i, i).real();
  return pushforward_endo(f, d);
}

CMat a1_perturbed(const SplitBundleModel& E, const BaseKahler& base, int d, const CMat& phi, double t) {
  CMat T = t_operator(E.metric(t), d);
  return a1_endomorphism(E, base, d, t) + phi - apply_operator(T, phi);
}

namespace {

void require_diagonal(const EndoPolyField& phi, int r) {
  if (static_cast<int>(phi.size()) != r) throw DomainError("endomorphism field has the wrong rank");
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(phi[static_cast<std::size_t>(i)].size()) != r) throw DomainError("endomorphism field has the wrong rank");
    for (int j = 0; j < r; ++j)
      if (i != j && !phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
        throw UnsupportedInput("a11_directional: only diagonal φ is supported on split bundles");
  }
}

}  // namespace

CMat a11_directional(const SplitBundleModel& E, const BaseKahler& base, int d, const EndoPolyField& phi, const CMat& Phi,
                     double t) {
  const int r = E.rank();
  require_diagonal(phi, r);
  std::vector<double> lap(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const Poly& p = phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    Poly p1 = p.derivative();
    lap[static_cast<std::size_t>(i)] = -radial_laplacian(t, p1(t), p1.derivative()(t), base);
  }
  CMat out = static_cast<double>(r) / (r + d) * trace_free(sym_lie_diag(lap, d));
  if (Phi.size() > 0) {
    CMat T = t_operator(E.metric(t), d);
    out += Phi - apply_operator(T, Phi);
  }
  return out;
}

SplitBundleModel shift_weights(const SplitBundleModel& E, const EndoPolyField& phi, double s) {
  require_diagonal(phi, E.rank());
  SplitBundleModel out = E;
  for (int i = 0; i < E.rank(); ++i) {
    Poly& w = out.summands[static_cast<std::size_t>(i)].weight;
    const Poly& p = phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    if (w.c.size() < p.c.size()) w.c.resize(p.c.size(), 0.0);
    for (std::size_t j = 0; j < p.c.size(); ++j) w.c[j] -= s * p.c[j];
  }
  return out;
}

}  // namespace projbal
