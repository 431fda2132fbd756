#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace projbal::cli {

struct Tolerances {
  double rho = 1e-9;
  double fit_rel = 0.05;
  double null_rel = 0.01;
  double psi0 = 1e-9;
  double t_laws = 1e-10;
  double trace = 1e-10;
  double balance = 1e-10;
  double certificate = 1e-8;
  double decay_exponent = 1.5;
  double curvature_fd = 1e-4;
};

/// Every field has a default; the defaults describe E = O(1)⊕O(1), d = 2 on
/// the Fubini–Study sphere.
struct ExperimentConfig {
  std::string name = "default";
  int r = 2;
  int d = 2;
  std::vector<int> degrees{1, 1};
  std::vector<std::vector<double>> summand_weights;  // empty, or one coefficient list per summand
  std::vector<double> base_weight;
  std::vector<int> k_ladder{8, 12, 16, 24, 32};
  int quadrature_cap = 1024;
  Tolerances tol;
  std::uint64_t seed = 20240601;
  std::string out = "projbal-out";
  std::string phi = "image";  // expansion shift direction: none | image | sd
  int balance_starts = 20;
  int balance_max_iter = 500;
  double delta_scale = 1.0;  // debug: rescales Δ̃ inside T (negative control)
  bool exact = false;
};

/// Validates against the schema; SchemaError lists every offending field.
ExperimentConfig parse_config(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& c);

/// FNV-1a 64 of the canonical (key-sorted, defaults filled) JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

std::uint64_t fnv1a(const std::string& s);

}  // namespace projbal::cli
