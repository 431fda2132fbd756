#pragma once

#include <vector>

namespace projbal {

/// Gauss–Legendre rule mapped to [0, 1].
struct UnitRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule; cached per n since ladders reuse the same sizes.
const UnitRule& gauss_legendre_unit(int n);

}  // namespace projbal
