#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "expdeg/hpreal.hpp"

namespace expdeg {

/// Monic Chebyshev polynomial Q_d(x), with Q_d(cos t) = 2^(1-d) cos(d t).
inline HPReal cheb_eval(std::uint64_t d, const HPReal& x) {
  long p = x.precision();
  if (d == 0) return HPReal(1, p);
  if (abs(x) <= 1) {
    // T_d by the three-term recurrence, then Q_d = 2^(1-d) T_d.
    HPReal t0(1, p);
    HPReal t1 = x;
    HPReal two_x = ldexp(x, 1);
    for (std::uint64_t k = 2; k <= d; ++k) {
      HPReal t2 = two_x * t1 - t0;
      t0 = std::move(t1);
      t1 = std::move(t2);
    }
    return ldexp(t1, 1 - static_cast<long>(d));
  }
  // |x| > 1: Q_d = 2^-d (t^d + t^-d) with t = |x| + sqrt(x^2-1) > 1, dominant branch first.
  HPReal ax = abs(x);
  HPReal t = ax + sqrt(sqr(ax) - 1);
  HPReal td = pow_si(t, static_cast<long>(d));
  HPReal q = ldexp(td + 1 / td, -static_cast<long>(d));
  if (x.sign() < 0 && d % 2 == 1) q = -q;
  return q;
}

struct ChebNodes {
  std::vector<HPReal> roots;
  std::vector<HPReal> extrema;
};

/// Roots cos(pi(2k+1)/2d) and extrema cos(pi k/d), both in decreasing order.
inline ChebNodes cheb_extrema_and_roots(std::uint64_t d, long prec_bits = kDefaultPrecision) {
  if (d == 0) throw DomainError("cheb_extrema_and_roots: d must be >= 1");
  HPReal pi = HPReal::pi(prec_bits);
  HPReal dd(d, prec_bits);
  ChebNodes out;
  out.roots.reserve(d);
  out.extrema.reserve(d + 1);
  for (std::uint64_t k = 0; k < d; ++k) {
    out.roots.push_back(cos(pi * HPReal(2 * k + 1, prec_bits) / ldexp(dd, 1)));
  }
  for (std::uint64_t k = 0; k <= d; ++k) {
    if (k == 0) {
      out.extrema.emplace_back(1, prec_bits);
    } else if (k == d) {
      out.extrema.emplace_back(-1, prec_bits);
    } else {
      out.extrema.push_back(cos(pi * HPReal(k, prec_bits) / dd));
    }
  }
  // 2k+1 = d gives an exact zero that cos() only approximates.
  if (d % 2 == 1) out.roots[(d - 1) / 2] = HPReal(0, prec_bits);
  return out;
}

/// Sum a_0/2 + sum_{j>=1} a_j T_j(x), which equals sum_j 2^(j-1) a_j Q_j(x).
template <class T>
T chebyshev_sum(const std::vector<T>& a, const T& x) {
  if (a.empty()) return x * 0;
  T b1 = x * 0;
  T b2 = x * 0;
  T two_x = x + x;
  for (std::size_t j = a.size(); j-- > 1;) {
    T b0 = two_x * b1 - b2 + a[j];
    b2 = std::move(b1);
    b1 = std::move(b0);
  }
  return x * b1 - b2 + a[0] / 2;
}

}  // namespace expdeg
