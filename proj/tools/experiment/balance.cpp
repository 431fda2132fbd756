#include <chrono>
#include <cmath>

#include "projbal/balancing.hpp"
#include "projbal/bergman.hpp"
#include "projbal/errors.hpp"
#include "projbal/sympower.hpp"
#include "random.hpp"
#include "suites.hpp"

namespace projbal::cli {

using nlohmann::json;

namespace {

// geometric mean of successive residual ratios over the last few steps
double contraction_rate(const std::vector<double>& h) {
  if (h.size() < 4) return NAN;
  const std::size_t a = h.size() >= 8 ? h.size() - 6 : 1, b = h.size() - 1;
  return std::pow(h[b] / h[a], 1.0 / static_cast<double>(b - a));
}

struct Fit {
  double slope = NAN, stderr_ = NAN;
};

Fit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return {};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
  }
  Fit f;
  f.slope = sxy / sxx;
  if (x.size() > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::log(y[i]) - my - f.slope * (std::log(x[i]) - mx);
      ss += e * e;
    }
    f.stderr_ = std::sqrt(ss / (n - 2) / sxx);
  }
  return f;
}

}  // namespace

ReportRecord run_balance(const SuiteContext& ctx) {
  const auto& c = ctx.cfg;
  ReportRecord rec;
  rec.experiment = "balance";
  rec.config_hash = ctx.hash;
  auto t0 = std::chrono::steady_clock::now();
  const int R = static_cast<int>(sym_dim(c.r, c.d));

  // start 0 is Sym^d of a random metric, an exact fixed point; the rest are generic
  Rng rng(c.seed);
  std::vector<CMat> starts;
  starts.push_back(sym_metric(random_cmetric(rng, c.r), c.d));
  for (int i = 0; i < c.balance_starts; ++i) {
    CMat A = random_cmat(rng, R, R);
    starts.push_back(A * A.adjoint() + 0.1 * CMat::Identity(R, R));
  }
  BalanceOptions opts;
  opts.tol = c.tol.balance;
  opts.max_iter = c.balance_max_iter;
  opts.certificate_tol = c.tol.certificate;
  std::vector<BalanceState> out(starts.size());
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] = fiber_balance(starts[static_cast<std::size_t>(i)], c.r, c.d, opts);
  });

  json runs = json::array();
  std::vector<std::vector<double>> rows;
  int converged = 0, certified = 0, worst_iter = 0;
  double worst_res = 0.0, worst_cert = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& s = out[i];
    converged += s.converged;
    certified += s.certified;
    worst_iter = std::max(worst_iter, s.iteration);
    worst_res = std::max(worst_res, s.residual);
    worst_cert = std::max(worst_cert, s.certificate);
    Eigen::SelfAdjointEigenSolver<CMat> es(starts[i]);
    runs.push_back({{"start", i},
                    {"condition", es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff()},
                    {"iterations", s.iteration},
                    {"converged", s.converged},
                    {"residual", s.residual},
                    {"certificate", s.certificate},
                    {"rate", contraction_rate(s.history)},
                    {"det_drift", s.det_drift}});
    for (std::size_t j = 0; j < s.history.size(); ++j) rows.push_back({double(i), double(j), s.history[j]});
    if (!s.converged) rec.warnings.push_back("start " + std::to_string(i) + " did not converge in " + std::to_string(c.balance_max_iter) + " steps");
  }
  rec.results["runs"] = runs;
  rec.results["max_iterations"] = worst_iter;
  rec.check("every start reaches the balance tolerance", "fiber-balanced", worst_res, c.tol.balance,
            std::to_string(converged) + "/" + std::to_string(out.size()) + " converged");
  rec.check("constant-Bergman certificate at the limit", "fiber-balanced", worst_cert, c.tol.certificate,
            std::to_string(certified) + "/" + std::to_string(out.size()) + " certified");
  rec.require("Sym^d h start is already balanced", "fiber-balanced", out[0].converged && out[0].iteration == 0);
  if (ctx.writer) ctx.writer->write_csv("balance_history.csv", {"start", "iteration", "residual"}, rows);
  rec.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ReportRecord run_almost_balanced(const SuiteContext& ctx) {
  const auto& c = ctx.cfg;
  ReportRecord rec;
  rec.experiment = "almost-balanced";
  rec.config_hash = ctx.hash;
  auto t0 = std::chrono::steady_clock::now();
  const auto E = bundle_of(c);
  const auto base = base_of(c);
  const auto& ks = c.k_ladder;
  std::vector<AlmostBalanced> out(ks.size());
  parallel_for(static_cast<int>(ks.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] = almost_balanced_gram(E, base, c.d, ks[static_cast<std::size_t>(i)]);
  });

  json rows_json = json::array();
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  double trace_worst = 0.0;
  bool guarantee = true;
  for (const auto& ab : out) {
    // below this ‖M‖ is roundoff in the Gram, not signal
    const double floor = 1e-12 * ab.D;
    trace_worst = std::max(trace_worst, std::abs(ab.trace_M) / ab.D);
    guarantee = guarantee && ab.guarantee;
    if (ab.op_norm_M > floor) {
      xs.push_back(ab.k);
      ys.push_back(ab.op_norm_M);
    }
    rows_json.push_back({{"k", ab.k}, {"D", ab.D}, {"D_limit", ab.D_limit}, {"trace_M", ab.trace_M}, {"op_norm_M", ab.op_norm_M},
                         {"below_roundoff", ab.op_norm_M <= floor}});
    rows.push_back({double(ab.k), ab.D, ab.D_limit, ab.trace_M, ab.op_norm_M});
  }
  rec.results["ladder"] = rows_json;
  rec.results["guarantee"] = guarantee;
  rec.check("tr M^{(k)} = 0 relative to D", "almost-balanced", trace_worst, c.tol.trace);

  const Fit f = loglog_fit(xs, ys);
  if (xs.size() < 2) {
    // M vanishes to roundoff on the whole ladder, so it is O(k^{-p}) for every p
    rec.results["decay_exponent"] = "inf";
    rec.results["decay_exponent_stderr"] = nullptr;
    rec.results["decay_note"] = "‖M‖ below 1e-12 D at every k: identically zero up to roundoff";
    if (guarantee) rec.at_least("‖M^{(k)}‖ decay exponent", "almost-balanced", INFINITY, c.tol.decay_exponent, "degenerate: M = 0");
  } else {
    rec.results["decay_exponent"] = -f.slope;
    rec.results["decay_exponent_stderr"] = std::isfinite(f.stderr_) ? json(f.stderr_) : json(nullptr);
    if (guarantee)
      rec.at_least("‖M^{(k)}‖ decay exponent", "almost-balanced", -f.slope, c.tol.decay_exponent);
    else
      rec.warnings.push_back("base or summand metrics are not Fubini–Study: decay is reported, not asserted");
  }
  if (ctx.writer) ctx.writer->write_csv("almost_balanced.csv", {"k", "D", "D_limit", "trace_M", "op_norm_M"}, rows);
  rec.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace projbal::cli
