#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "expdeg/errors.hpp"

namespace expdeg {

/// C(n, k) exactly, or CapacityError when it does not fit in 64 bits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) {
      throw CapacityError("binomial coefficient exceeds 64 bits", std::numeric_limits<std::uint64_t>::max());
    }
  }
  return static_cast<std::uint64_t>(r);
}

/// Number of exponent vectors over `nvars` variables with total degree <= D.
inline std::uint64_t count_multi_indices(std::uint64_t nvars, std::uint64_t D) { return binomial(nvars + D, D); }

/// Advances `a` to the next exponent vector in graded lexicographic order: total degree
/// ascending, then lexicographically descending ((2,0,0), (1,1,0), (1,0,1), (0,2,0), ...).
/// Returns false after the last vector of degree `D`.
inline bool next_graded_lex(std::vector<std::uint16_t>& a, std::uint64_t D) {
  const std::size_t n = a.size();
  if (n == 0) return false;
  std::uint64_t tail = a[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    if (a[i] > 0) {
      --a[i];
      a[i + 1] = static_cast<std::uint16_t>(tail + 1);
      for (std::size_t j = i + 2; j < n; ++j) a[j] = 0;
      return true;
    }
    tail += a[i];
  }
  std::uint64_t deg = tail + 1;
  if (deg > D) return false;
  a.assign(n, 0);
  a[0] = static_cast<std::uint16_t>(deg);
  return true;
}

/// All exponent vectors over 2m variables (x_1..x_m, y_1..y_m) of total degree <= 2d,
/// in graded lexicographic order.
inline std::vector<std::vector<std::uint16_t>> enumerate_multi_indices(std::uint64_t m, std::uint64_t d,
                                                                       std::uint64_t ceiling = 1ull << 22) {
  if (m < 1 || d < 1) throw DomainError("enumerate_multi_indices: m and d must be >= 1");
  std::uint64_t M = count_multi_indices(2 * m, 2 * d);
  if (M > ceiling) throw CapacityError("multi-index count " + std::to_string(M) + " exceeds ceiling", M);
  std::vector<std::vector<std::uint16_t>> out;
  out.reserve(M);
  std::vector<std::uint16_t> a(2 * m, 0);
  do {
    out.push_back(a);
  } while (next_graded_lex(a, 2 * d));
  return out;
}

/// Monomials over n variables of total degree <= D in graded lexicographic order, with the
/// rank function and a parent link (same monomial with one fewer power of `var`).
class MonomialTable {
 public:
  MonomialTable() = default;
  MonomialTable(std::size_t nvars, std::uint64_t D) : n_(nvars), D_(D) {
    size_ = count_multi_indices(nvars, D);
    binom_.assign(nvars + D + 2, std::vector<std::uint64_t>(nvars + 2, 0));
    for (std::size_t a = 0; a < binom_.size(); ++a) {
      for (std::size_t b = 0; b < binom_[a].size() && b <= a; ++b) binom_[a][b] = binomial(a, b);
    }
    exps_.reserve(size_ * n_);
    parent_.reserve(size_);
    var_.reserve(size_);
    std::vector<std::uint16_t> a(n_, 0);
    std::uint64_t r = 0;
    do {
      exps_.insert(exps_.end(), a.begin(), a.end());
      if (r == 0) {
        parent_.push_back(0);
        var_.push_back(0);
      } else {
        std::size_t v = 0;
        while (a[v] == 0) ++v;
        --a[v];
        parent_.push_back(static_cast<std::uint32_t>(rank(a.data())));
        ++a[v];
        var_.push_back(static_cast<std::uint16_t>(v));
      }
      ++r;
    } while (next_graded_lex(a, D_));
  }

  std::size_t nvars() const { return n_; }
  std::uint64_t max_degree() const { return D_; }
  std::uint64_t size() const { return size_; }
  const std::uint16_t* exponents(std::uint64_t r) const { return exps_.data() + r * n_; }
  std::uint32_t parent(std::uint64_t r) const { return parent_[r]; }
  std::uint16_t var(std::uint64_t r) const { return var_[r]; }

  /// Position of exponent vector `a` (length nvars) in the table order.
  std::uint64_t rank(const std::uint16_t* a) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += a[i];
    // vectors of degree < t: C(n + t - 1, n)
    std::uint64_t r = t == 0 ? 0 : choose(n_ + t - 1, n_);
    std::uint64_t rem = t;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      std::size_t left = n_ - i - 1;
      // vectors sharing the prefix but with a larger entry at i come first
      for (std::uint64_t v = rem; v > a[i]; --v) r += choose(rem - v + left - 1, left - 1);
      rem -= a[i];
    }
    return r;
  }

 private:
  std::uint64_t choose(std::uint64_t a, std::uint64_t b) const {
    if (a < binom_.size() && b < binom_[a].size()) return binom_[a][b];
    return binomial(a, b);
  }

  std::size_t n_ = 0;
  std::uint64_t D_ = 0;
  std::uint64_t size_ = 0;
  std::vector<std::vector<std::uint64_t>> binom_;
  std::vector<std::uint16_t> exps_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint16_t> var_;
};

}  // namespace expdeg
