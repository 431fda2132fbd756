// Acceptance run: one PASS/FAIL line per criterion, each with its pinned
// tolerance and wall-clock cap.  Criterion 2 is checked in its literal form,
// which is false for r, d >= 2 (the d^{r-1} factor is spurious); it is listed in
// kExpectedFailures and the corrected identity is reported next to it.  The exit
// code is nonzero iff the set of failing criteria differs from that list.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "projbal/balancing.hpp"
#include "projbal/bergman.hpp"
#include "projbal/errors.hpp"
#include "projbal/fibercalc.hpp"
#include "projbal/sphere.hpp"
#include "projbal/sympower.hpp"
#include "test_util.hpp"

using namespace projbal;
using namespace projbal::testing;

namespace {

// tolerances
constexpr double kTLawTol = 1e-10;
constexpr double kRhoTol = 1e-9;
constexpr double kFitRel = 0.05;
constexpr double kNullRel = 0.01;
constexpr double kPsi0Tol = 1e-9;
constexpr double kBalanceTol = 1e-10;
constexpr double kCertificateTol = 1e-8;
constexpr int kBalanceMaxIter = 500;
constexpr double kTraceTol = 1e-10;
constexpr double kDecayExponent = 1.5;
constexpr double kRoundoffFloor = 1e-12;  // ‖M‖ below this times D is treated as zero

// runtime caps, seconds
constexpr double kCap[11] = {0, 1, 30, 120, 60, 300, 600, 900, 120, 300, 1200};

const std::set<int> kExpectedFailures{2};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

LineBundleMetricModel line(int a, std::vector<double> w = {}) { return {a, Poly{std::move(w)}}; }

SplitBundleModel o1o1() { return {{line(1), line(1)}}; }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

Outcome c1() {
  for (int r = 1; r <= 4; ++r)
    for (int d = 0; d <= 3; ++d) {
      MonomialBasis basis(r, d);
      QMat H = sym_metric(identity_of<QComplex>(r), d);
      for (int i = 0; i < basis.size(); ++i)
        for (int j = 0; j < basis.size(); ++j)
          if (H(i, j) != (i == j ? QComplex(basis[i].factorial() / factorial(d)) : QComplex(0)))
            return {false, "mismatch at r=" + std::to_string(r) + " d=" + std::to_string(d)};
    }
  return {true, "16 (r,d) pairs, exact"};
}

// the literal form multiplies the fiber integral by d^{r-1}; 100 triples
Outcome c2(bool corrected) {
  Rng rng(2);
  int hits = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 + trial % 3, d = 1 + (trial / 3) % 3;
    const int R = static_cast<int>(sym_dim(r, d));
    QMat h = random_qmetric(rng, r);
    QVec v = random_qvec(rng, R), w = random_qvec(rng, R);
    const auto C = c_constant(r, d);
    const QComplex want = C.coeff * matmul(adjoint_of(QMat(w)), matmul(sym_metric(h, d), QMat(v)))(0, 0);
    const auto got = corrected ? hat_inner_integral_fs(v, w, h, d) : hat_inner_integral(v, w, h, d);
    hits += got.coeff == want && (want.is_zero() || got.pi_power == C.pi_power);
    ++total;
  }
  return {hits == total, std::to_string(hits) + "/" + std::to_string(total) + " exact matches"};
}

Outcome c3() {
  Rng rng(3);
  double trace = 0, fixed = 0;
  std::string dims;
  bool ok = true;
  for (auto [r, d] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 2}}) {
    CMat h = random_cmetric(rng, r);
    CMat T = t_operator(h, d);
    const int R = static_cast<int>(sym_dim(r, d));
    for (int t = 0; t < 50; ++t) {
      CMat phi = random_cmat(rng, R, R);
      trace = std::max(trace, std::abs(apply_operator(T, phi).trace() - phi.trace()) / max_abs(phi));
      CMat SA = sym_lie(random_h_hermitian(rng, h), d);
      fixed = std::max(fixed, max_abs(apply_operator(T, SA) - SA) / max_abs(SA));
    }
    try {
      auto split = fixed_space_projector(T, 1e-8, r * r);
      ok = ok && split.kernel_dim == r * r && split.gap > 1e-3;
      dims += " " + std::to_string(split.kernel_dim);
    } catch (const AmbiguityError&) {
      ok = false;
      dims += " ?";
    }
  }
  return {ok && trace < kTLawTol && fixed < kTLawTol, "trace " + fmt(trace) + ", fixed " + fmt(fixed) + ", dims" + dims};
}

Outcome c4() {
  SplitBundleModel E{{line(0)}};
  BaseKahler fs;
  std::vector<Rational> nodes;
  for (int i = 0; i < 10; ++i) nodes.emplace_back(2 * i + 1, 20);
  for (int k = 0; k <= 64; ++k)
    for (const QMat& b : bergman_exact_fs(E, fs, 0, k, nodes))
      if (b(0, 0) != QComplex(Rational(k + 1))) return {false, "β̃ ≠ k + 1 at k = " + std::to_string(k)};
  double s_err = 0, a_err = 0;
  for (double t : default_nodes()) {
    s_err = std::max(s_err, std::abs(scalar_curvature(fs, t) - 2.0));
    a_err = std::max(a_err, std::abs(a1_endomorphism(E, fs, 0, t)(0, 0) - 1.0));
  }
  return {s_err < 1e-12 && a_err < 1e-12, "k = 0..64 exact; |S - 2| " + fmt(s_err) + ", |A_1 - 1| " + fmt(a_err)};
}

Outcome c5() {
  BaseKahler fs;
  const auto pts = fiber_sample_points(2, 50);
  double worst = 0;
  for (int d : {1, 2})
    for (int k : {8, 16}) worst = std::max(worst, rho_identity_check(bergman_record(o1o1(), fs, d, k), pts).max_deviation);
  return {worst < kRhoTol, "max deviation " + fmt(worst)};
}

const std::vector<int> kLadder{8, 12, 16, 24, 32};

std::vector<BergmanRecord> ladder(const SplitBundleModel& E, const BaseKahler& base, int d) {
  std::vector<BergmanRecord> out;
  for (int k : kLadder) out.push_back(bergman_record(E, base, d, k));
  return out;
}

Outcome c6() {
  BaseKahler fs;
  auto fit = fit_expansion(ladder(o1o1(), fs, 2));
  double fs_err = 0;
  for (const CMat& a : fit.a1) fs_err = std::max(fs_err, max_abs(a - CMat::Identity(3, 3)));
  BaseKahler bumpy{Poly{{0.0, 0.3, -0.2, 0.1}}};
  auto recs = ladder(o1o1(), bumpy, 2);
  auto bfit = fit_expansion(recs);
  double b_err = 0;
  for (std::size_t n = 0; n < recs[0].nodes.size(); ++n) {
    CMat want = a1_endomorphism(o1o1(), bumpy, 2, recs[0].nodes[n]);
    b_err = std::max(b_err, max_abs(bfit.a1[n] - want) / max_abs(want));
  }
  return {fs_err < kFitRel && b_err < kFitRel, "FS " + fmt(fs_err) + ", conformal base " + fmt(b_err)};
}

Outcome c7() {
  BaseKahler fs;
  const int d = 2;
  const CMat id = CMat::Identity(2, 2);
  CMat T = t_operator(id, d);
  auto split = fixed_space_projector(T, 1e-8, 4);
  Rng rng(7);
  CMat phi = apply_operator(split.p_image, random_h_hermitian(rng, sym_metric(id, d)));
  phi /= max_abs(phi);
  CMat sd = sym_lie(random_h_hermitian(rng, id), d);
  sd /= max_abs(sd);
  std::vector<BergmanRecord> base, pert, null;
  for (int k : kLadder) {
    base.push_back(bergman_record(o1o1(), fs, d, k));
    pert.push_back(perturbed_bergman(o1o1(), fs, d, k, [&](double) { return phi; }));
    null.push_back(perturbed_bergman(o1o1(), fs, d, k, [&](double) { return sd; }));
  }
  auto fb = fit_expansion(base), fp = fit_expansion(pert), fn = fit_expansion(null);
  const CMat want = phi - apply_operator(T, phi);
  double shift = 0, nul = 0;
  for (std::size_t n = 0; n < fb.a1.size(); ++n) {
    shift = std::max(shift, max_abs(fp.a1[n] - fb.a1[n] - want) / max_abs(want));
    nul = std::max(nul, max_abs(fn.a1[n] - fb.a1[n]) / max_abs(sd));
  }
  return {shift < kFitRel && nul < kNullRel, "Im(I-T) shift " + fmt(shift) + ", S^d null " + fmt(nul)};
}

Outcome c8() {
  Rng rng(8);
  std::uniform_int_distribution<int> deg(-1, 3), rank(2, 3), dd(1, 3);
  std::uniform_real_distribution<double> coef(-0.2, 0.2);
  double worst = 0;
  int made = 0, tries = 0;
  while (made < 10 && tries < 1000) {
    ++tries;
    SplitBundleModel E;
    const int r = rank(rng);
    for (int i = 0; i < r; ++i) E.summands.push_back(line(deg(rng), {0.0, coef(rng), coef(rng)}));
    BaseKahler base{Poly{{0.0, coef(rng), coef(rng)}}};
    try {
      E.validate();
      base.validate();
    } catch (const DomainError&) {
      continue;
    }
    const int d = dd(rng);
    for (double t : default_nodes()) worst = std::max(worst, max_abs(psi_pair(E, base, d, t).second - psi0_via_fiber(E, base, d, t)));
    ++made;
  }
  return {made == 10 && worst < kPsi0Tol, std::to_string(made) + " configurations, max deviation " + fmt(worst)};
}

Outcome c9() {
  Rng rng(9);
  BalanceOptions opts;
  opts.tol = kBalanceTol;
  opts.max_iter = kBalanceMaxIter;
  opts.certificate_tol = kCertificateTol;
  int ok = 0, worst_iter = 0;
  double worst_cert = 0;
  for (int s = 0; s < 20; ++s) {
    CMat A = random_cmat(rng, 3, 3);
    auto st = fiber_balance(A * A.adjoint() + 0.1 * CMat::Identity(3, 3), 2, 2, opts);
    ok += st.converged && st.certified;
    worst_iter = std::max(worst_iter, st.iteration);
    worst_cert = std::max(worst_cert, st.certificate);
  }
  return {ok == 20, std::to_string(ok) + "/20 converged and certified, max iterations " + std::to_string(worst_iter) +
                        ", max certificate " + fmt(worst_cert)};
}

struct Decay {
  double trace = 0;
  std::vector<double> ks, norms;
  int above_floor = 0;
  double exponent = NAN;
};

Decay decay(const BaseKahler& base, const std::vector<int>& ks) {
  Decay out;
  for (int k : ks) {
    auto ab = almost_balanced_gram(o1o1(), base, 2, k);
    out.trace = std::max(out.trace, std::abs(ab.trace_M));
    out.ks.push_back(k);
    out.norms.push_back(ab.op_norm_M);
    out.above_floor += ab.op_norm_M > kRoundoffFloor * ab.D;
  }
  if (out.above_floor >= 2) {
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
      mx += std::log(out.ks[i]) / n;
      my += std::log(out.norms[i]) / n;
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sxx += std::pow(std::log(out.ks[i]) - mx, 2);
      sxy += (std::log(out.ks[i]) - mx) * (std::log(out.norms[i]) - my);
    }
    out.exponent = -sxy / sxx;
  } else {
    out.exponent = INFINITY;  // M is zero up to roundoff on the whole ladder
  }
  return out;
}

Outcome c10() {
  auto dk = decay(BaseKahler{}, {8, 16, 24, 32, 40, 48});
  double max_norm = 0;
  for (double v : dk.norms) max_norm = std::max(max_norm, v);
  std::string detail = "trace " + fmt(dk.trace) + ", max ‖M‖ " + fmt(max_norm) + ", exponent " + fmt(dk.exponent);
  if (!std::isfinite(dk.exponent)) detail += " (M vanishes to roundoff: the data is homogeneous)";
  return {dk.trace < kTraceTol && dk.exponent >= kDecayExponent, detail};
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sym_metric of the identity is diag(I!/d!)", c1},
      {"d^{r-1} fiber pairing equals C_{r,d} Sym^d h (literal)", [] { return c2(false); }},
      {"T-operator laws and fixed-space dimension", c3},
      {"exact Bergman anchor for O(k), S = 2, A_1 = 1", c4},
      {"ρ_k equals C^{-1} tr(λ_d B̃_k)", c5},
      {"ladder-fitted A_1 vs closed form", c6},
      {"A_1 shift under Φ", c7},
      {"Ψ_0 closed form vs fiber push-forward", c8},
      {"fiber balancing from 20 random starts", c9},
      {"almost-balanced trace and decay", c10},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    const bool in_time = secs < kCap[n];
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(n);
    std::printf("criterion %2d  %s  %s: %s  [%.2f s, cap %.0f s%s]%s\n", n, pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs, kCap[n], in_time ? "" : ", over cap",
                !pass && kExpectedFailures.count(n) ? "  (expected)" : "");
    if (n == 2) {
      auto c = c2(true);
      std::printf("      2*    %s  fiber pairing without d^{r-1} equals C_{r,d} Sym^d h: %s\n", c.pass ? "PASS" : "FAIL",
                  c.detail.c_str());
      if (!c.pass) failed.insert(-2);  // the corrected identity must hold
    }
    std::fflush(stdout);
  }
  // informational: non-homogeneous data, where no decay rate is claimed
  auto bumpy = decay(BaseKahler{Poly{{0.0, 0.3, -0.2, 0.1}}}, {8, 16, 32, 64, 128});
  std::printf("      10*   info  conformal base, k = 8..128: ‖M‖ =");
  for (double v : bumpy.norms) std::printf(" %.3g", v);
  std::printf(", fitted exponent %.3g (no guarantee)\n", bumpy.exponent);

  const int passed = static_cast<int>(criteria.size()) - static_cast<int>(std::count_if(failed.begin(), failed.end(), [](int n) { return n > 0; }));
  std::printf("%d/%zu criteria pass; expected failures:", passed, criteria.size());
  for (int n : kExpectedFailures) std::printf(" %d", n);
  std::printf("\n");
  return failed == kExpectedFailures ? 0 : 1;
}
