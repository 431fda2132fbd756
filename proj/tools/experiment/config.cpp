#include "config.hpp"

#include <cstdio>
#include <set>

#include "projbal/errors.hpp"
#include "projbal/sphere.hpp"

namespace projbal::cli {

using nlohmann::json;

namespace {

struct Checker {
  std::vector<std::string> problems;

  void bad(const std::string& field, const std::string& why) { problems.push_back(field + ": " + why); }

  template <class T>
  bool get(const json& j, const char* key, T& out, const std::string& prefix = "") {
    if (!j.contains(key)) return false;
    try {
      out = j.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      bad(prefix + key, "wrong type");
      return false;
    }
  }
};

const std::set<std::string> kTopKeys{"name", "r", "d", "degrees", "summand_weights", "base_weight", "k_ladder", "quadrature_cap",
                                     "tolerances", "seed", "out", "phi", "balance_starts", "balance_max_iter", "delta_scale",
                                     "exact"};
const std::set<std::string> kTolKeys{"rho", "fit_rel", "null_rel", "psi0", "t_laws", "trace", "balance", "certificate",
                                     "decay_exponent", "curvature_fd"};

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Checker ck;
  if (!j.is_object()) throw SchemaError("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kTopKeys.count(it.key())) ck.bad(it.key(), "unknown field");
  ck.get(j, "name", c.name);
  const bool has_r = ck.get(j, "r", c.r);
  ck.get(j, "d", c.d);
  const bool has_deg = ck.get(j, "degrees", c.degrees);
  if (has_r && !has_deg) c.degrees.assign(static_cast<std::size_t>(std::max(c.r, 0)), 1);
  if (has_deg && !has_r) c.r = static_cast<int>(c.degrees.size());
  ck.get(j, "summand_weights", c.summand_weights);
  ck.get(j, "base_weight", c.base_weight);
  ck.get(j, "k_ladder", c.k_ladder);
  ck.get(j, "quadrature_cap", c.quadrature_cap);
  ck.get(j, "seed", c.seed);
  ck.get(j, "out", c.out);
  ck.get(j, "phi", c.phi);
  ck.get(j, "balance_starts", c.balance_starts);
  ck.get(j, "balance_max_iter", c.balance_max_iter);
  ck.get(j, "delta_scale", c.delta_scale);
  ck.get(j, "exact", c.exact);
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (!t.is_object()) {
      ck.bad("tolerances", "must be an object");
    } else {
      for (auto it = t.begin(); it != t.end(); ++it)
        if (!kTolKeys.count(it.key())) ck.bad("tolerances." + it.key(), "unknown field");
      ck.get(t, "rho", c.tol.rho, "tolerances.");
      ck.get(t, "fit_rel", c.tol.fit_rel, "tolerances.");
      ck.get(t, "null_rel", c.tol.null_rel, "tolerances.");
      ck.get(t, "psi0", c.tol.psi0, "tolerances.");
      ck.get(t, "t_laws", c.tol.t_laws, "tolerances.");
      ck.get(t, "trace", c.tol.trace, "tolerances.");
      ck.get(t, "balance", c.tol.balance, "tolerances.");
      ck.get(t, "certificate", c.tol.certificate, "tolerances.");
      ck.get(t, "decay_exponent", c.tol.decay_exponent, "tolerances.");
      ck.get(t, "curvature_fd", c.tol.curvature_fd, "tolerances.");
    }
  }

  if (c.r < 1 || c.r > 3) ck.bad("r", "must be 1, 2 or 3");
  if (c.d < 0 || c.d > 3) ck.bad("d", "must be in 0..3");
  if (static_cast<int>(c.degrees.size()) != c.r) ck.bad("degrees", "length must equal r");
  if (!c.summand_weights.empty() && static_cast<int>(c.summand_weights.size()) != c.r)
    ck.bad("summand_weights", "must be empty or have r entries");
  for (const auto& w : c.summand_weights)
    if (static_cast<int>(w.size()) > kMaxWeightDegree + 1) ck.bad("summand_weights", "degree exceeds 4");
  if (static_cast<int>(c.base_weight.size()) > kMaxWeightDegree + 1) ck.bad("base_weight", "degree exceeds 4");
  if (c.k_ladder.size() < 3) ck.bad("k_ladder", "needs at least 3 values");
  for (int k : c.k_ladder)
    if (k < 1 || k > 64) ck.bad("k_ladder", "values must lie in 1..64");
  if (c.quadrature_cap < 64) ck.bad("quadrature_cap", "must be >= 64");
  if (c.phi != "none" && c.phi != "image" && c.phi != "sd") ck.bad("phi", "must be none, image or sd");
  if (c.balance_starts < 0) ck.bad("balance_starts", "must be >= 0");
  if (c.balance_max_iter < 0) ck.bad("balance_max_iter", "must be >= 0");
  if (!ck.problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : ck.problems) msg += "\n  " + p;
    throw SchemaError(msg);
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json t = {{"rho", c.tol.rho},
            {"fit_rel", c.tol.fit_rel},
            {"null_rel", c.tol.null_rel},
            {"psi0", c.tol.psi0},
            {"t_laws", c.tol.t_laws},
            {"trace", c.tol.trace},
            {"balance", c.tol.balance},
            {"certificate", c.tol.certificate},
            {"decay_exponent", c.tol.decay_exponent},
            {"curvature_fd", c.tol.curvature_fd}};
  return {{"name", c.name},
          {"r", c.r},
          {"d", c.d},
          {"degrees", c.degrees},
          {"summand_weights", c.summand_weights},
          {"base_weight", c.base_weight},
          {"k_ladder", c.k_ladder},
          {"quadrature_cap", c.quadrature_cap},
          {"tolerances", t},
          {"seed", c.seed},
          {"out", c.out},
          {"phi", c.phi},
          {"balance_starts", c.balance_starts},
          {"balance_max_iter", c.balance_max_iter},
          {"delta_scale", c.delta_scale},
          {"exact", c.exact}};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("out");  // where results go does not change them
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace projbal::cli
