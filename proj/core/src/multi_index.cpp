#include "projbal/multi_index.hpp"

#include <algorithm>
#include <functional>

#include "projbal/errors.hpp"

namespace projbal {

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw DomainError("MultiIndex: negative exponent");
    degree_ += e;
  }
}

Rational MultiIndex::factorial() const {
  Rational f = 1;
  for (int e : exps_) f *= projbal::factorial(e);
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.rank() != rank()) throw DomainError("MultiIndex: rank mismatch in sum");
  std::vector<int> e(exps_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += o.exps_[i];
  return MultiIndex(std::move(e));
}

MonomialBasis::MonomialBasis(int r, int d) : r_(r), d_(d) {
  if (r < 1) throw DomainError("MonomialBasis: rank must be >= 1");
  if (d < 0) throw DomainError("MonomialBasis: degree must be >= 0");
  std::vector<int> cur(static_cast<std::size_t>(r), 0);
  // Descending lex: the first exponent runs from d down to 0.
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == r - 1) {
      cur[static_cast<std::size_t>(pos)] = left;
      basis_.emplace_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[static_cast<std::size_t>(pos)] = e;
      rec(pos + 1, left - e);
    }
  };
  rec(0, d);
  for (int i = 0; i < size(); ++i) lookup_.emplace(basis_[static_cast<std::size_t>(i)].exponents(), i);
}

int MonomialBasis::index_of(const std::vector<int>& exps) const {
  auto it = lookup_.find(exps);
  return it == lookup_.end() ? -1 : it->second;
}

int MonomialBasis::index_of(const MultiIndex& I) const { return index_of(I.exponents()); }

long sym_dim(int r, int d) {
  if (r < 1) throw DomainError("sym_dim: rank must be >= 1");
  if (d < 0) throw DomainError("sym_dim: degree must be >= 0");
  // binom(r+d-1, d) computed incrementally; exact at every step.
  long out = 1;
  for (int i = 1; i <= d; ++i) out = out * (r - 1 + i) / i;
  return out;
}

}  // namespace projbal
