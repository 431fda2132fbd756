#pragma once

// Fiberwise balancing on (P(V*), O(d)).
//
// Pair(H) = K^{-1} ∫ <ŝ, t̂>_Ĥ ω_Ĥ^{r-1}/(r-1)!  (K = d^{r-1} C_{r,d}) is the Gram of
// Sym^d V under the hatted structure of H.  H is balanced when Pair(H) ∝ H.
// Every Sym^d h is balanced; the converse is the uniqueness statement.

#include <vector>

#include "projbal/fibercalc.hpp"
#include "projbal/scalar.hpp"

namespace projbal {

/// Exact Pair(Sym^d h) through the monomial calculus; equals Sym^d h.
QMat hatted_pairing_exact(const QMat& h, int d);

/// One step: Pair(H) rescaled to det H.  DomainError if H is degenerate.
CMat fiber_tmap(const CMat& H, int r, int d, const PairingQuadrature& q = {});

/// ‖c^{-1} H^{-1/2} Pair(H) H^{-1/2} - I‖_op with c making the determinant 1.
double balance_residual(const CMat& H, const CMat& pair);

/// Spread (max - min)/mean over fiber points of Σ|v̂_i|²_Ĥ for a Pair-orthonormal
/// basis {v_i}, i.e. of ℓ^T Pair^{-1} conj(ℓ) / ℓ^T H^{-1} conj(ℓ).  Zero iff balanced.
double bergman_spread(const CMat& H, const CMat& pair, int r, int d, const std::vector<CVec>& points);

struct BalanceOptions {
  double tol = 1e-10;
  int max_iter = 500;
  PairingQuadrature quad;
  double certificate_tol = 1e-8;
  int certificate_points = 64;
};

struct BalanceState {
  CMat H;
  double residual = 0.0;
  int iteration = 0;
  bool converged = false;
  std::vector<double> history;  // residual before each step, last entry is the final residual
  double certificate = 0.0;     // bergman_spread at the final H
  bool certified = false;
  double det_drift = 0.0;       // max |det H_n / det H_0 - 1|
  bool quadrature = true;       // fiber integrals were done by quadrature (always, for general H)
};

/// Iterate fiber_tmap from H0 until the residual drops below tol or max_iter
/// steps are used.  Non-convergence is reported through `converged`, never thrown.
BalanceState fiber_balance(const CMat& H0, int r, int d, const BalanceOptions& opts = {});

}  // namespace projbal
