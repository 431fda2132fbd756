#include "projbal/quadrature.hpp"

#include <map>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

#include "projbal/errors.hpp"

namespace projbal {

const UnitRule& gauss_legendre_unit(int n) {
  static std::map<int, UnitRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw DomainError("gauss_legendre_unit: need n >= 1");
  // legendre_p_zeros returns the nonnegative zeros of P_n in increasing order.
  std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> xs;
  for (double x : pos) {
    xs.push_back(x);
    if (x != 0.0) xs.push_back(-x);
  }
  UnitRule rule;
  for (double x : xs) {
    double dp = boost::math::legendre_p_prime<double>(n, x);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes.push_back(0.5 * (1.0 + x));
    rule.weights.push_back(0.5 * w);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace projbal
