#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "projbal/scalar.hpp"

namespace projbal {

/// Exponent vector I = (i_1, ..., i_r) with all entries nonnegative.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  int rank() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exps_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exps_; }

  /// I! = i_1! ... i_r!
  Rational factorial() const;

  MultiIndex operator+(const MultiIndex& o) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.exps_ == b.exps_; }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return a.exps_ != b.exps_; }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) { return a.exps_ < b.exps_; }

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Monomial basis {e^I : |I| = d} of Sym^d V, dim V = r.
///
/// Ordering is lexicographically descending on the exponent vector, so for
/// r = 2, d = 2 the basis reads (e1^2, e1 e2, e2^2).  Every matrix in the
/// library is expressed in this order.
class MonomialBasis {
 public:
  MonomialBasis(int r, int d);

  int rank() const { return r_; }
  int degree() const { return d_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const MultiIndex& operator[](int i) const { return basis_[static_cast<std::size_t>(i)]; }
  const std::vector<MultiIndex>& indices() const { return basis_; }

  /// Position of I in the basis, or -1 when I is not a degree-d index of rank r.
  int index_of(const MultiIndex& I) const;
  int index_of(const std::vector<int>& exps) const;

 private:
  int r_;
  int d_;
  std::vector<MultiIndex> basis_;
  std::map<std::vector<int>, int> lookup_;
};

/// binom(r + d - 1, d); throws DomainError for r < 1 or d < 0.
long sym_dim(int r, int d);

}  // namespace projbal
