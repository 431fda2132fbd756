#pragma once

// The toy base X = CP^1 with L = O(1) and split bundles E = ⊕ O(a_i).
//
// All data is U(1)-invariant and written in t = u/(1+u) ∈ [0,1], u = |z|².
// The base Kähler potential is log(1+u) + ψ(t), so with Θ(t) = t + t(1-t)ψ'(t)
//
//   ω = Θ'(t) (1-t)² i dz∧dz̄,    ∫_X f ω = 2π ∫_0^1 f Θ'(t) dt,
//   Λ i∂∂̄ f = (t(1-t) f')' / Θ'   for radial f.
//
// Summand metrics are h_i = (1+u)^{-a_i} e^{-φ_i(t)}; curvature operators
// are normalised so the Fubini–Study O(a) has ΛF ≡ a.

#include <functional>
#include <utility>
#include <vector>

#include "projbal/scalar.hpp"

namespace projbal {

/// Real polynomial Σ c_j t^j.
struct Poly {
  std::vector<double> c;

  double operator()(double t) const;
  Poly derivative() const;
  bool is_zero() const;
  int degree() const;
};

/// Max degree accepted for conformal weights.
inline constexpr int kMaxWeightDegree = 4;

struct LineBundleMetricModel {
  int degree = 0;
  Poly weight;  // φ(t); zero means the Fubini–Study power

  double metric(double t) const;  // h = (1-t)^a e^{-φ}
};

struct BaseKahler {
  Poly weight;  // ψ(t); zero means ω_FS

  double theta(double t) const;
  double theta_prime(double t) const;
  double theta_second(double t) const;
  /// ω = density · i dz∧dz̄
  double density(double t) const;
  /// σ = (1+u)^{-1} e^{-ψ}, the metric on L with i∂∂̄(-log σ) = ω.
  double sigma(double t) const;
  /// Throws DomainError unless Θ' > 0 on [0,1] and the degree guard holds.
  void validate() const;
};

struct SplitBundleModel {
  std::vector<LineBundleMetricModel> summands;

  int rank() const { return static_cast<int>(summands.size()); }
  void validate() const;
  /// Pointwise metric diag(h_i(t)).
  CMat metric(double t) const;
};

/// 2π ∫_0^1 f(t) Θ'(t) dt with an n-point Gauss–Legendre rule.
double integrate_base(const std::function<double(double)>& f, const BaseKahler& base, int n = 64);

/// Λ i∂∂̄ f for radial f given through f' and f''.
double radial_laplacian(double t, double fp, double fpp, const BaseKahler& base);

double lambda_curvature(const LineBundleMetricModel& mdl, const BaseKahler& base, double t);
std::vector<double> lambda_curvature(const LineBundleMetricModel& mdl, const BaseKahler& base, const std::vector<double>& nodes);

double scalar_curvature(const BaseKahler& base, double t);
std::vector<double> scalar_curvature(const BaseKahler& base, const std::vector<double>& nodes);

/// diag(ΛF_i) at t.
std::vector<double> lambda_curvatures(const SplitBundleModel& E, const BaseKahler& base, double t);

/// sup over nodes of |ΛF_E - μ I|, μ the global mean of tr(ΛF_E)/r.
double he_residual(const SplitBundleModel& E, const BaseKahler& base, const std::vector<double>& nodes);

/// S^d of a diagonal endomorphism: entries Σ α_i x_i over the monomial basis.
CMat sym_lie_diag(const std::vector<double>& x, int d);

/// A_1(h, ω) at t in the e^α frame.
CMat a1_endomorphism(const SplitBundleModel& E, const BaseKahler& base, int d, double t);

/// (Ψ_1, Ψ_0) at t from the closed formula.
std::pair<CMat, CMat> psi_pair(const SplitBundleModel& E, const BaseKahler& base, int d, double t);

/// Ψ_0 at t recomputed as the fiber push-forward of f_{m-1} = d Σ ΛF_i |λ_i|²/h_i / Q.
CMat psi0_via_fiber(const SplitBundleModel& E, const BaseKahler& base, int d, double t);

/// A_1 + Φ - T(Φ), T taken with respect to the pointwise metric h(t).
CMat a1_perturbed(const SplitBundleModel& E, const BaseKahler& base, int d, const CMat& phi, double t);

/// Endomorphism field of E given by radial polynomials; only diagonal entries are supported.
using EndoPolyField = std::vector<std::vector<Poly>>;

/// The (φ, 0, Φ) direction: r/(r+d) tracefree(S^d diag(-Λ i∂∂̄ φ_i)) + Φ - TΦ.
CMat a11_directional(const SplitBundleModel& E, const BaseKahler& base, int d, const EndoPolyField& phi,
                     const CMat& Phi, double t);

/// E with each weight replaced by φ_i - s·δφ_i; used to differentiate along the metric h(I + sφ).
SplitBundleModel shift_weights(const SplitBundleModel& E, const EndoPolyField& phi, double s);

}  // namespace projbal
