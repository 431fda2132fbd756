#pragma once

// Finite-k Bergman kernels for Sym^d E ⊗ L^k over CP¹.
//
// Sections are c·z^p e^α with 0 <= p <= n_α = Σ α_i a_i + k.  The scale
// c = sqrt(binom(n_α, p)) makes the Fubini–Study Gram uniform in p; without it
// the condition number grows like 2^{n_α} and the guard trips at moderate k.
// Every metric variant here is U(1)-invariant, so the Gram only couples
// sections with equal p and pointwise quantities are evaluated at z = sqrt(u).
//
// Normalisation: the L² structure is ∫_X <s, t> ω with ω of total mass 2π,
// and β̃_k = 2π B̃_k is the quantity with β̃_k = k + A_1 + O(1/k).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "projbal/multi_index.hpp"
#include "projbal/scalar.hpp"
#include "projbal/sphere.hpp"

namespace projbal {

struct SectionEntry {
  int alpha = 0;  // index into the monomial basis of Sym^d
  int p = 0;
  double scale = 1.0;
};

struct SectionBasis {
  int r = 0, d = 0, k = 0;
  MonomialBasis fiber{1, 0};
  std::vector<int> n_alpha;  // may be negative: that summand has no sections
  std::vector<SectionEntry> sections;  // ordered by α, then p

  int size() const { return static_cast<int>(sections.size()); }
  int max_p() const;
};

/// Throws EmptySpaceError when every n_α < 0.
SectionBasis section_basis(const SplitBundleModel& E, int d, int k);

/// Pointwise hermitian form on Sym^d E at t, in the e^α frame (σ^k not included).
using PointwiseMetric = std::function<CMat(double)>;

struct QuadratureOptions {
  int start = 0;       // 0: max(32, k + 16)
  int cap = 1024;      // node-doubling cap; exceeding it raises PrecisionError
  double tol = 1e-12;  // relative change between doublings
};

struct GramMatrix {
  CMat m;
  std::string variant;
  std::string volume = "omega";  // the base volume form used
  double condition = 0.0;
  int nodes = 0;  // converged Gauss–Legendre size
};

/// Sym^d h(t).
PointwiseMetric sym_d_h_metric(const SplitBundleModel& E, int d);

/// h(k) = Sym^d h (Ψ_1 + Ψ_0/k).  Throws ThresholdError (with the minimal
/// valid k) when the form is not positive at some grid point.
PointwiseMetric metric_h_of_k(const SplitBundleModel& E, const BaseKahler& base, int d, int k);

/// Smallest k >= 1 with Sym^d h(I + Ψ_0/k) positive on a 401-point grid.
int h_of_k_threshold(const SplitBundleModel& E, const BaseKahler& base, int d);

/// h_t(Φ) = M (I + tΦ) for a pointwise form M.
PointwiseMetric h_t_phi_metric(PointwiseMetric m, std::function<CMat(double)> phi, double t);

/// Gram of the section basis under ∫_X <·,·>_{metric ⊗ σ^k} ω.
GramMatrix gram(const SectionBasis& basis, const PointwiseMetric& metric, const std::string& variant, const BaseKahler& base,
                const QuadratureOptions& q = {});

struct BergmanRecord {
  int r = 0, d = 0, k = 0;
  SectionBasis basis;
  GramMatrix gram;  // under the variant metric
  BaseKahler base;
  PointwiseMetric variant_metric;  // metric the sections are orthonormal for
  PointwiseMetric ref_metric;      // metric used to dualise: Sym^d h, or Sym^d h(I + Φ/k)
  std::vector<double> nodes;
  std::vector<CMat> btilde;  // B̃_k at nodes
  std::vector<CMat> b_variant;  // B_k for the variant metric at nodes
  std::vector<CMat> b_sym;      // B_k computed from a separate Sym^d h Gram (unperturbed records only)
  double identity_deviation = 0.0;  // max |B̃ - B_variant Ψ^{-1}|
  double hermitian_defect = 0.0;    // max |M_ref B̃ - (M_ref B̃)^†|
  double trace_integral = 0.0;      // ∫ tr(B_variant) ω, equals N_k
  double trace_integral_sym = 0.0;  // ∫ tr(B_sym) ω, equals N_k
  double first_order_defect = 0.0;  // perturbed records: max |h(k,Φ) - Sym^d h(I + (TΦ + Ψ_0)/k)| relative
  std::optional<double> D;
  std::optional<CMat> M;

  /// β̃_k = 2π B̃_k at node i.
  CMat beta(std::size_t i) const;
};

inline const std::vector<double>& default_nodes() {
  static const std::vector<double> n{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95};
  return n;
}

/// Bergman record from a Gram (normally under h(k)); gram_ref, when given, is the
/// Sym^d h Gram used for the B_k cross-check.
BergmanRecord bergman_endo(const GramMatrix& gram, const SectionBasis& basis, const BaseKahler& base,
                           PointwiseMetric variant_metric, PointwiseMetric ref_metric,
                           const std::vector<double>& nodes = default_nodes(), const GramMatrix* gram_ref = nullptr);

/// The standard pipeline: h(k) Gram, Sym^d h Gram, record.
BergmanRecord bergman_record(const SplitBundleModel& E, const BaseKahler& base, int d, int k,
                             const std::vector<double>& nodes = default_nodes(), const QuadratureOptions& q = {});

/// Exact β̃_k at rational t for Fubini–Study data (all weights zero).  Throws
/// UnsupportedInput otherwise.
std::vector<QMat> bergman_exact_fs(const SplitBundleModel& E, const BaseKahler& base, int d, int k,
                                   const std::vector<Rational>& nodes);

/// Deterministic fiber points: coordinate directions, then Halton points pushed
/// through Box–Muller.
std::vector<CVec> fiber_sample_points(int r, int count);

struct RhoCheck {
  double max_deviation = 0.0;
  std::vector<double> rho;  // C_{r,d}^{-1} tr(λ_d B̃) at (node, point), node-major
};

/// Both sides of ρ_k = C^{-1} tr(λ_d(v, H) B̃_k) at every record node and fiber point:
/// the left via explicit hatted values of orthonormal sections, the right via the record.
RhoCheck rho_identity_check(const BergmanRecord& rec, const std::vector<CVec>& points);

struct ExpansionFit {
  std::vector<int> ks;
  std::vector<CMat> a1;        // intercept per node
  std::vector<CMat> slope;     // 1/k coefficient per node
  double residual = 0.0;       // max RMS residual over nodes and entries
  std::vector<double> distance;  // max_node |β̃_k - kI - A_1| per k
  bool warning = false;          // distances not decreasing in k
};

/// Per node and entry, least squares of β̃_k - kI = A_1 + c/k over the ladder.
ExpansionFit fit_expansion(const std::vector<BergmanRecord>& records);

/// The Φ-perturbed record.  Implemented for E = O(a)^{⊕r} with a common weight,
/// where PE* = X × CP^{r-1} and h(k,Φ) is the exact push-forward
///   (1 + (d/k)ΛF) h_1^d · K^{-1}∫<ŝ,t̂>_{Ĥ_Φ} ω_{Ĥ_Φ}^{r-1}/(r-1)!,  Ĥ_Φ from Sym^d I (I + Φ/k),
/// with the fiber integral done by hatted_pairing.  Φ = 0 returns bergman_record.
BergmanRecord perturbed_bergman(const SplitBundleModel& E, const BaseKahler& base, int d, int k,
                                const std::function<CMat(double)>& phi, const std::vector<double>& nodes = default_nodes(),
                                const QuadratureOptions& q = {});

struct AlmostBalanced {
  int k = 0;
  double D = 0.0;           // k^{-1} V_k / N_k
  double D_limit = 0.0;     // its k → ∞ value
  std::vector<double> diag;  // distinct diagonal entries of the normalised Gram, one per p
  std::vector<int> mult;     // multiplicity of each (R per p)
  double trace_M = 0.0;
  double op_norm_M = 0.0;
  bool guarantee = true;  // false when the q = 0 hypotheses (FS base, FS summands) fail
};

/// The q = 0 almost-balanced Gram: orthonormalise in L²(g ⊗ σ^k, dμ_{g,k}),
/// rescale g' = g/ρ_k, and split the new Gram as D·I + M.  E = O(a)^{⊕r}
/// with a common weight; otherwise UnsupportedInput.
AlmostBalanced almost_balanced_gram(const SplitBundleModel& E, const BaseKahler& base, int d, int k);

}  // namespace projbal
