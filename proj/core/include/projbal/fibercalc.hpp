#pragma once

// Calculus of homogeneous functions on the fiber P(V*) ≅ CP^{r-1}.
//
// A fiber point is a covector ξ with coordinates λ_i = ξ(e_i).  The reference
// metric h on V induces the dual quadratic form Q(λ) = λ^T h^{-1} conj(λ),
// and ω_Q = i∂∂̄ log Q is the Fubini–Study form it defines.
//
// Every fiber integral in here is a rational multiple of π^{r-1}; the
// templated routines return only the rational (or floating) coefficient and
// the π power is carried separately by FiberValue.

#include <map>
#include <vector>

#include "projbal/linalg.hpp"
#include "projbal/multi_index.hpp"
#include "projbal/sympower.hpp"

namespace projbal {

/// coeff · π^pi_power
template <class S>
struct FiberValue {
  S coeff;
  int pi_power = 0;
  cd value() const;
};

/// ∫_{C^{r-1}} λ^I conj(λ)^J / (1 + Σ|λ_j|²)^s  against Lebesgue measure, with
/// I, J chart multi-indices of length r - 1.  Zero unless I = J, otherwise
/// π^{r-1} I! (s - r - |I|)! / (s - 1)!.
FiberValue<QComplex> monomial_fiber_integral(const MultiIndex& I, const MultiIndex& J, int s, int r);

/// C_{r,d} = ∫_{C^{r-1}} (i dλ∧dλ̄)^{r-1} / (1+|λ|²)^{r+d} = (2π)^{r-1} d! / (r+d-1)!.
FiberValue<QComplex> c_constant(int r, int d);

/// Rational part of c_constant: 2^{r-1} d! / (r+d-1)!.
Rational c_constant_coeff(int r, int d);

/// Rational part of ∫ |ν^α|² / |ν|^{2|α|} ω_FS^{r-1}/(r-1)!  =  2^{r-1} α! / (r+|α|-1)!.
Rational projective_moment_coeff(const MultiIndex& alpha);

/// Moment matrices Mom_n(α, β) = ∫ λ^α conj(λ)^β / Q^n ω_Q^{r-1}/(r-1)!  (π^{r-1} stripped)
/// for |α| = |β| = n.  Computed from an LDL^† factorisation of Q, which
/// diagonalises the form without square roots so rational input stays rational.
template <class S>
class FiberMoments {
 public:
  explicit FiberMoments(const Mat<S>& h);

  int rank() const { return r_; }
  const Mat<S>& metric() const { return h_; }
  /// h^{-1}: Q(λ) = λ^T A conj(λ).
  const Mat<S>& dual_form() const { return a_; }
  const Mat<S>& moments(int n);

 private:
  int r_;
  Mat<S> h_;
  Mat<S> a_;
  Mat<S> bt_;      // B^T where λ = B μ
  Vec<S> dpiv_;    // Q = Σ D_k |μ_k|²
  std::map<int, Mat<S>> cache_;
};

/// f(λ) = Σ_{I,J} f_{IJ} λ^I conj(λ)^J / Q(λ)^N, coefficients in MonomialBasis(r, N).
template <class S>
struct HomogeneousFiberFunction {
  int order = 0;
  Mat<S> metric;  // reference h on V
  Mat<S> coeffs;  // coeffs(I, J) = f_{IJ}

  static HomogeneousFiberFunction constant(const Mat<S>& h, const S& c);
  /// Real-valued iff the coefficient matrix is hermitian.
  bool is_real(double tol = 1e-12) const;
  cd evaluate(const CVec& lambda) const;
};

/// ∫ f ω_Q^{r-1}/(r-1)!, π^{r-1} stripped.
template <class S>
S integrate(const HomogeneousFiberFunction<S>& f, FiberMoments<S>& mom);

/// d^{r-1} ∫ <v̂, ŵ>_{ĥ^d} ω_ĥ^{r-1}/(r-1)!, i.e. the pairing integrated against
/// ω_g^{r-1}/(r-1)! where ω_g = d ω_ĥ.
template <class S>
FiberValue<S> hat_inner_integral(const Vec<S>& v, const Vec<S>& w, const Mat<S>& h, int d);

/// Same integral without the d^{r-1} rescaling; equals C_{r,d} <v, w>_{Sym^d h} exactly.
template <class S>
FiberValue<S> hat_inner_integral_fs(const Vec<S>& v, const Vec<S>& w, const Mat<S>& h, int d);

/// Ψ(f): <s, Ψ(f) t>_{Sym^d h} = C_{r,d}^{-1} ∫ f <ŝ, t̂> ω_ĥ^{r-1}/(r-1)!.
/// Extended complex-linearly to non-real f when require_real is false.
template <class S>
Mat<S> pushforward_endo(const HomogeneousFiberFunction<S>& f, int d, bool require_real = true);

template <class S>
Mat<S> pushforward_endo(const HomogeneousFiberFunction<S>& f, int d, FiberMoments<S>& mom, bool require_real);

/// F(Φ)([ξ]) = tr(λ_d(ξ, Sym^d h) Φ) = ℓ^T Φ H^{-1} conj(ℓ) / Q^d, ℓ_I = λ^I.
template <class S>
HomogeneousFiberFunction<S> f_of_phi(const Mat<S>& phi, const Mat<S>& h, int d);

/// Δ̃f = -(1/d) Λ_{ω_Q} i∂∂̄ f (the ω_g-trace of i∂̄∂).  For f = p/Q^N,
///   Λ i∂∂̄ f = (Q L p - N(N+r-1) p) / Q^N,   L = Σ h_{ji} ∂_i ∂_{j̄},
/// so the output keeps order N.  `scale` multiplies the 1/d factor and is
/// only varied by the negative-control runs.
template <class S>
HomogeneousFiberFunction<S> delta_tilde(const HomogeneousFiberFunction<S>& f, int d, double scale = 1.0);

/// Matrix of T(Φ) = Ψ(F(Φ) + Δ̃F(Φ)) on End(Sym^d V), column-major vec of matrix units.
template <class S>
Mat<S> t_operator(const Mat<S>& h, int d, double delta_scale = 1.0);

/// Apply a vec-ordered operator to an R×R endomorphism.
CMat apply_operator(const CMat& op, const CMat& phi);

struct FixedSpaceSplit {
  CMat kernel_basis;  // columns span ker(I - T), vec-ordered
  CMat image_basis;   // columns span Im(I - T)
  CMat p_kernel;      // projector onto ker along Im
  CMat p_image;
  CVec eigenvalues;
  double gap = 0.0;   // min |λ - 1| over eigenvalues outside the kernel cluster
  int kernel_dim = 0;
};

/// Splits End(Sym^d V) = ker(I-T) ⊕ Im(I-T).  The kernel is the eigenvalue-1
/// cluster (|λ-1| < tol); its dimension must equal expected_kernel_dim (r²
/// for the T operator), otherwise AmbiguityError.
FixedSpaceSplit fixed_space_projector(const CMat& T, double tol, int expected_kernel_dim);

/// Node counts for the hatted-pairing quadrature.  Counts double until the
/// entries move by less than tol (relative to the largest entry) or the cap
/// is hit, which raises PrecisionError.
struct PairingQuadrature {
  int x_nodes = 24;
  int phi_nodes = 24;
  double tol = 1e-12;
  int cap = 768;
};

struct HattedPairing {
  CMat pairing;  // hermitian-form matrix, normalised by K = d^{r-1} C_{r,d}
  double error_estimate = 0.0;
  int x_nodes = 0;
  int phi_nodes = 0;
};

/// K^{-1} ∫ <ŝ, t̂>_Ĥ ω_Ĥ^{r-1}/(r-1)! for an arbitrary positive H on Sym^d V,
/// where <ŝ, t̂>_Ĥ = (ℓ·s) conj(ℓ·t) / ℓ^T H^{-1} conj(ℓ) and ω_Ĥ is its curvature.
/// Not in the closed monomial class unless H = Sym^d h, so this integrates in
/// moment coordinates (simplex × torus) with the density det(∂∂̄ log N)/det(∂∂̄ log|λ|²).
/// Returns Sym^d h when H = Sym^d h.  r ∈ {1, 2, 3}.
HattedPairing hatted_pairing(const CMat& H, int r, int d, const PairingQuadrature& q = {});

}  // namespace projbal

#include "projbal/fibercalc_impl.hpp"
