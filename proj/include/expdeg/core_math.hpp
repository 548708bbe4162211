#pragma once

#include <cstdint>

#include "expdeg/hpreal.hpp"

namespace expdeg {

/// G(x) = sqrt(x^2+1) + x log(sqrt(x^2+1) - x), evaluated as sqrt(x^2+1) - x asinh(x).
inline HPReal eval_G(const HPReal& x) {
  if (!x.is_finite()) throw DomainError("eval_G: non-finite argument");
  if (x.sign() < 0) throw DomainError("eval_G: argument must be >= 0");
  HPReal s = sqrt(sqr(x) + 1);
  return s - x * asinh(x);
}

/// Psi(v, lambda) = s + v log((s - v)/lambda) with s = sqrt(v^2+lambda^2).
/// (s - v)/lambda is rewritten as lambda/(s + v) so no cancellation occurs.
inline HPReal eval_Psi(std::uint64_t v, const HPReal& lambda) {
  if (!lambda.is_finite() || lambda < 0.5) throw DomainError("eval_Psi: lambda must be >= 1/2");
  HPReal vv(v, lambda.precision());
  HPReal s = sqrt(sqr(vv) + sqr(lambda));
  if (v == 0) return s;
  return s + vv * (log(lambda) - log(s + vv));
}

/// F(n) = n log lambda - n log 2 + n - a log a - b log b, a = (n-v)/2, b = (n+v)/2, 0 log 0 = 0.
inline HPReal eval_F(const HPReal& n, std::uint64_t v, const HPReal& lambda) {
  if (!lambda.is_finite() || lambda < 0.5) throw DomainError("eval_F: lambda must be >= 1/2");
  long p = min_prec(n, lambda);
  HPReal vv(v, p);
  if (!n.is_finite() || n < vv) throw DomainError("eval_F: requires n >= v");
  auto xlogx = [](const HPReal& t) { return t.is_zero() ? t : t * log(t); };
  HPReal a = ldexp(n - vv, -1);
  HPReal b = ldexp(n + vv, -1);
  return n * log(lambda) - n * HPReal::ln2(p) + n - xlogx(a) - xlogx(b);
}

struct SaddleDiagnostics {
  std::uint64_t v = 0;
  HPReal lambda;
  HPReal n0;
  HPReal F_at_n0;
};

inline SaddleDiagnostics saddle_diagnostics(std::uint64_t v, const HPReal& lambda) {
  HPReal vv(v, lambda.precision());
  HPReal n0 = sqrt(sqr(vv) + sqr(lambda));
  return {v, lambda, n0, eval_F(n0, v, lambda)};
}

namespace detail {

// Root of G(x) = target inside [lo, hi] where G(lo) >= target >= G(hi).
// Bisection to 2^-50 relative width, then Newton with G'(x) = -asinh(x).
inline HPReal solve_G_level(const HPReal& target, HPReal lo, HPReal hi) {
  long p = target.precision();
  if (eval_G(lo) < target || eval_G(hi) > target) {
    throw ConvergenceError("G level bracket does not straddle the target");
  }
  const HPReal rel = HPReal::pow2(-50, p);
  for (int it = 0; it < 4096 && hi - lo > rel * hi; ++it) {
    HPReal mid = ldexp(lo + hi, -1);
    if (eval_G(mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > rel * hi) throw ConvergenceError("G level bisection did not converge");
  HPReal x = ldexp(lo + hi, -1);
  const HPReal tiny = HPReal::pow2(-(p - 4), p);
  for (int it = 0; it < 64; ++it) {
    HPReal step = (eval_G(x) - target) / asinh(x);
    HPReal next = x + step;
    if (next < lo || next > hi) break;
    x = next;
    if (abs(step) <= tiny * x) break;
  }
  return x;
}

// Starting upper end max(1/r, e), doubled until G drops below the target.
inline HPReal grow_upper(const HPReal& target, HPReal lo, const HPReal& r) {
  long p = r.precision();
  HPReal e = exp(HPReal(1, p));
  HPReal hi = max(max(1 / r, e), lo);
  while (eval_G(hi) > target) {
    hi = ldexp(hi, 1);
    if (hi.exponent() > 200) throw ConvergenceError("G level upper bracket diverged");
  }
  return hi;
}

}  // namespace detail

/// Unique positive root of G(nu) = 1 - 1/r.
inline HPReal solve_nu(const HPReal& r) {
  if (!r.is_finite() || r.sign() <= 0) throw DomainError("solve_nu: r must be > 0");
  HPReal target = 1 - 1 / r;
  // G(x) >= 1 - x^2/2 puts the root at or above sqrt(2/r).
  HPReal lo = sqrt(2 / r);
  HPReal hi = detail::grow_upper(target, lo, r);
  while (eval_G(lo) < target) lo = ldexp(lo, -1);
  return detail::solve_G_level(target, lo, hi);
}

/// Unique positive root of G(mu) = -1 - 1/r.
inline HPReal solve_mu(const HPReal& r) {
  if (!r.is_finite() || r.sign() <= 0) throw DomainError("solve_mu: r must be > 0");
  HPReal target = -1 - 1 / r;
  HPReal lo(2, r.precision());
  HPReal hi = detail::grow_upper(target, lo, r);
  return detail::solve_G_level(target, lo, hi);
}

/// Root of G(z) = -1.
inline HPReal z_star(long prec_bits = kDefaultPrecision) {
  HPReal lo(2, prec_bits);
  HPReal hi = exp(HPReal(1, prec_bits));
  return detail::solve_G_level(HPReal(-1, prec_bits), lo, hi);
}

}  // namespace expdeg
