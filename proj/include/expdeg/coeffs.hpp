#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "expdeg/hpreal.hpp"

namespace expdeg {

enum class Target { EXP_NEG, EXP_POS };

inline std::string to_string(Target t) { return t == Target::EXP_NEG ? "exp-neg" : "exp-pos"; }

inline Target parse_target(const std::string& s) {
  if (s == "exp-neg" || s == "EXP_NEG") return Target::EXP_NEG;
  if (s == "exp-pos" || s == "EXP_POS") return Target::EXP_POS;
  throw ParseError("unknown target '" + s + "' (expected exp-neg or exp-pos)");
}

inline constexpr long kPrecisionCeiling = 1L << 20;

struct CoeffValue {
  HPReal value;
  HPReal error_radius;
};

struct Interval {
  HPReal lo;
  HPReal hi;
};

struct TailBounds {
  std::uint64_t D = 0;
  HPReal lambda;
  Target target = Target::EXP_NEG;
  HPReal upper;
  HPReal lower;
  std::uint64_t V = 0;  // last index summed explicitly
};

namespace detail {

// Which multiple of I_v(lambda): E = I_v, A = 2 e^-lambda (-1)^v I_v, B = 2 e^lambda I_v.
enum class CoeffKind { E, A, B };

inline long bits_for(double x) { return static_cast<long>(std::ceil(std::log2(x + 2.0))); }

inline long work_precision(long p_target, std::uint64_t v, const HPReal& lambda, long extra) {
  long p = p_target + 32 + 4 * bits_for(static_cast<double>(v) + lambda.to_double(Round::Up)) + extra;
  if (p > kPrecisionCeiling) throw PrecisionOverflow("coefficient working precision exceeds ceiling", p);
  return p;
}

// Interval for log of the prefactor multiplying I_v.
inline Interval log_prefactor(CoeffKind kind, const HPReal& lam_lo, const HPReal& lam_hi, long p) {
  if (kind == CoeffKind::E) return {HPReal(0, p), HPReal(0, p)};
  HPReal l2lo = HPReal::ln2(p, Round::Down);
  HPReal l2hi = HPReal::ln2(p, Round::Up);
  if (kind == CoeffKind::A) return {sub(l2lo, lam_hi, Round::Down), sub(l2hi, lam_lo, Round::Up)};
  return {add(l2lo, lam_lo, Round::Down), add(l2hi, lam_hi, Round::Up)};
}

// Certified enclosure of prefactor * sum_k (lambda/2)^(v+2k) / (k! (v+k)!).
// The sum starts at the largest term and walks outward until the geometric
// remainder bounds on both sides fall below 2^-(p+8) of the partial sum.
inline Interval series_interval(std::uint64_t v, const HPReal& lambda, CoeffKind kind, long p) {
  const mpfr_rnd_t D = MPFR_RNDD, U = MPFR_RNDU;
  HPReal lam_lo(lambda, p, Round::Down), lam_hi(lambda, p, Round::Up);
  HPReal half_lo = ldexp(lam_lo, -1), half_hi = ldexp(lam_hi, -1);
  HPReal q_lo = sqr(half_lo, Round::Down), q_hi = sqr(half_hi, Round::Up);
  Interval pf = log_prefactor(kind, lam_lo, lam_hi, p);

  // Peak index: smallest k with (k+1)(v+k+1) > lambda^2/4.
  double lam_d = lambda.to_double();
  double vd = static_cast<double>(v);
  double kd = std::max(0.0, (std::sqrt(vd * vd + lam_d * lam_d) - vd - 2.0) / 2.0);
  std::uint64_t kpk = static_cast<std::uint64_t>(std::floor(kd));
  auto ratio_below_one = [&](std::uint64_t k) {
    return compare(q_hi, HPReal((k + 1), p) * HPReal(v + k + 1, p)) < 0;
  };
  while (kpk > 0 && ratio_below_one(kpk - 1)) --kpk;
  while (!ratio_below_one(kpk)) ++kpk;

  // log t_k = (v+2k) log(lambda/2) - lngamma(k+1) - lngamma(v+k+1) + log prefactor
  HPReal n(v + 2 * kpk, p);
  HPReal arg_lo = mul(n, log(half_lo, Round::Down), Round::Down);
  HPReal arg_hi = mul(n, log(half_hi, Round::Up), Round::Up);
  HPReal g1(kpk + 1, p), g2(v + kpk + 1, p);
  arg_lo = sub(arg_lo, lngamma(g1, Round::Up), Round::Down);
  arg_lo = sub(arg_lo, lngamma(g2, Round::Up), Round::Down);
  arg_lo = add(arg_lo, pf.lo, Round::Down);
  arg_hi = sub(arg_hi, lngamma(g1, Round::Down), Round::Up);
  arg_hi = sub(arg_hi, lngamma(g2, Round::Down), Round::Up);
  arg_hi = add(arg_hi, pf.hi, Round::Up);
  HPReal peak_lo = exp(arg_lo, Round::Down);
  HPReal peak_hi = exp(arg_hi, Round::Up);

  HPReal s_lo = peak_lo, s_hi = peak_hi;
  HPReal t_lo(p, nullptr), t_hi(p, nullptr), r(p, nullptr), one_minus(p, nullptr), rem(p, nullptr);
  HPReal tol_s(p, nullptr);

  // Upward: t_{k+1} = t_k q / ((k+1)(v+k+1)); ratios decrease in k.
  t_lo = peak_lo;
  t_hi = peak_hi;
  HPReal rem_up(p, nullptr);
  for (std::uint64_t k = kpk;; ++k) {
    // remainder after index k: t_k rho_k / (1 - rho_k), rho_k = q / ((k+1)(v+k+1))
    mpfr_div_ui(r.get(), q_hi.get(), k + 1, U);
    mpfr_div_ui(r.get(), r.get(), v + k + 1, U);
    mpfr_ui_sub(one_minus.get(), 1, r.get(), D);
    if (one_minus.sign() > 0) {
      mpfr_mul(rem.get(), t_hi.get(), r.get(), U);
      mpfr_div(rem.get(), rem.get(), one_minus.get(), U);
      mpfr_mul_2si(tol_s.get(), s_lo.get(), -(p + 8), D);
      if (mpfr_lessequal_p(rem.get(), tol_s.get()) || t_hi.is_zero()) {
        rem_up = rem;
        break;
      }
    }
    mpfr_mul(t_lo.get(), t_lo.get(), q_lo.get(), D);
    mpfr_div_ui(t_lo.get(), t_lo.get(), k + 1, D);
    mpfr_div_ui(t_lo.get(), t_lo.get(), v + k + 1, D);
    mpfr_mul(t_hi.get(), t_hi.get(), q_hi.get(), U);
    mpfr_div_ui(t_hi.get(), t_hi.get(), k + 1, U);
    mpfr_div_ui(t_hi.get(), t_hi.get(), v + k + 1, U);
    mpfr_add(s_lo.get(), s_lo.get(), t_lo.get(), D);
    mpfr_add(s_hi.get(), s_hi.get(), t_hi.get(), U);
  }

  // Downward: t_{k-1} = t_k k (v+k) / q; ratios decrease as k decreases.
  t_lo = peak_lo;
  t_hi = peak_hi;
  HPReal rem_down(0, p);
  for (std::uint64_t k = kpk; k > 0; --k) {
    // remainder below index k: t_k sigma / (1 - sigma), sigma = k (v+k) / q
    mpfr_set_ui(r.get(), k, U);
    mpfr_mul_ui(r.get(), r.get(), v + k, U);
    mpfr_div(r.get(), r.get(), q_lo.get(), U);
    mpfr_ui_sub(one_minus.get(), 1, r.get(), D);
    if (one_minus.sign() > 0) {
      mpfr_mul(rem.get(), t_hi.get(), r.get(), U);
      mpfr_div(rem.get(), rem.get(), one_minus.get(), U);
      mpfr_mul_2si(tol_s.get(), s_lo.get(), -(p + 8), D);
      if (mpfr_lessequal_p(rem.get(), tol_s.get())) {
        rem_down = rem;
        break;
      }
    }
    mpfr_mul_ui(t_lo.get(), t_lo.get(), k, D);
    mpfr_mul_ui(t_lo.get(), t_lo.get(), v + k, D);
    mpfr_div(t_lo.get(), t_lo.get(), q_hi.get(), D);
    mpfr_mul_ui(t_hi.get(), t_hi.get(), k, U);
    mpfr_mul_ui(t_hi.get(), t_hi.get(), v + k, U);
    mpfr_div(t_hi.get(), t_hi.get(), q_lo.get(), U);
    mpfr_add(s_lo.get(), s_lo.get(), t_lo.get(), D);
    mpfr_add(s_hi.get(), s_hi.get(), t_hi.get(), U);
  }
  s_hi = add(s_hi, rem_up, Round::Up);
  s_hi = add(s_hi, rem_down, Round::Up);
  return {s_lo, s_hi};
}

inline bool radius_ok(const CoeffValue& c, long p_target) {
  HPReal floor_mag = HPReal::pow2(-p_target, c.value.precision());
  HPReal scale = max(abs(c.value), floor_mag);
  return c.error_radius <= ldexp(scale, -p_target);
}

inline CoeffValue to_coeff(const Interval& iv, bool negate) {
  long p = iv.lo.precision();
  HPReal mid = ldexp(add(iv.lo, iv.hi), -1);
  HPReal r = max(sub(iv.hi, mid, Round::Up), sub(mid, iv.lo, Round::Up));
  if (negate) mid = -mid;
  return {mid, HPReal(r, std::max(p, kMinPrecision), Round::Up)};
}

inline CoeffValue compute_kind(std::uint64_t v, const HPReal& lambda, long p_target, CoeffKind kind) {
  if (!lambda.is_finite() || lambda < 0.5) throw DomainError("coefficient: lambda must be >= 1/2");
  if (p_target < 1) throw DomainError("coefficient: p_target must be positive");
  for (long extra = 0;; extra += 64) {
    long p = work_precision(p_target, v, lambda, extra);
    Interval iv = series_interval(v, lambda, kind, p);
    CoeffValue c = to_coeff(iv, kind == CoeffKind::A && (v % 2 == 1));
    if (radius_ok(c, p_target)) return c;
  }
}

}  // namespace detail

/// E_{v,lambda} = sum_k (lambda/2)^(v+2k) / (k! (v+k)!), the modified Bessel value I_v(lambda).
inline CoeffValue compute_E(std::uint64_t v, const HPReal& lambda, long p_target = kDefaultPrecision) {
  return detail::compute_kind(v, lambda, p_target, detail::CoeffKind::E);
}

/// A_{v,lambda} = 2 e^-lambda (-1)^v E_{v,lambda}.
inline CoeffValue compute_A(std::uint64_t v, const HPReal& lambda, long p_target = kDefaultPrecision) {
  return detail::compute_kind(v, lambda, p_target, detail::CoeffKind::A);
}

/// B_{v,lambda} = 2 e^lambda E_{v,lambda}.
inline CoeffValue compute_B(std::uint64_t v, const HPReal& lambda, long p_target = kDefaultPrecision) {
  return detail::compute_kind(v, lambda, p_target, detail::CoeffKind::B);
}

/// Lazily computed a_v (A for EXP_NEG, B for EXP_POS) for v = 0, 1, 2, ...
/// Values live in fixed blocks; each block is seeded at its top by the series and
/// filled by the downward recurrence I_{v-1} = I_{v+1} + (2v/lambda) I_v, whose terms
/// are all positive, so directed rounding keeps every enclosure valid. A value depends
/// only on (lambda, target, p_target, v), never on the order of requests.
/// Not safe for concurrent use of one instance.
class CoefficientTable {
 public:
  CoefficientTable(const HPReal& lambda, Target target, long p_target = kDefaultPrecision)
      : lambda_(lambda), target_(target), p_target_(p_target) {
    if (!lambda.is_finite() || lambda < 0.5) throw DomainError("coefficient table: lambda must be >= 1/2");
    if (target == Target::EXP_POS && lambda > 1.0e8) {
      throw CapacityError("exp-pos coefficients overflow the exponent range for lambda > 1e8", 0);
    }
    double s = 8.0 * std::sqrt(lambda.to_double());
    block_ = 256;
    while (static_cast<double>(block_) < s && block_ < (1u << 20)) block_ *= 2;
  }

  const HPReal& lambda() const { return lambda_; }
  Target target() const { return target_; }
  long p_target() const { return p_target_; }
  std::uint64_t block_size() const { return block_; }

  const CoeffValue& coeff(std::uint64_t v) { return entry(v).value; }
  const HPReal& abs_lo(std::uint64_t v) { return entry(v).lo; }
  const HPReal& abs_hi(std::uint64_t v) { return entry(v).hi; }

  /// Upper bound on sum_{j > v} |a_j| from the ratio bound
  /// I_{j+1}/I_j <= lambda / (j + 1/2 + sqrt((j + 1/2)^2 + lambda^2)), decreasing in j.
  HPReal remainder_after(std::uint64_t v) {
    const HPReal& hi = abs_hi(v);
    long p = hi.precision();
    HPReal h(static_cast<double>(v) + 0.5, p);
    HPReal lam_hi(lambda_, p, Round::Up);
    HPReal den = add(h, sqrt(add(sqr(h, Round::Down), sqr(HPReal(lambda_, p, Round::Down), Round::Down), Round::Down), Round::Down), Round::Down);
    HPReal q = div(lam_hi, den, Round::Up);
    HPReal one_minus = sub(HPReal(1, p), q, Round::Down);
    if (one_minus.sign() <= 0) return HPReal::infinity(p);
    return div(mul(hi, q, Round::Up), one_minus, Round::Up);
  }

 private:
  struct Entry {
    CoeffValue value;
    HPReal lo;
    HPReal hi;
  };

  const Entry& entry(std::uint64_t v) {
    std::uint64_t b = v / block_;
    auto it = blocks_.find(b);
    if (it == blocks_.end()) it = blocks_.emplace(b, compute_block(b)).first;
    return it->second[v - b * block_];
  }

  std::vector<Entry> compute_block(std::uint64_t b) const {
    const std::uint64_t first = b * block_;
    const std::uint64_t top = first + block_ - 1;
    const detail::CoeffKind kind = target_ == Target::EXP_NEG ? detail::CoeffKind::A : detail::CoeffKind::B;
    for (long extra = 0;; extra += 64) {
      long p = detail::work_precision(p_target_, top + 1, lambda_, extra);
      // magnitudes only; the sign of A is applied when packaging
      Interval hi_seed = detail::series_interval(top + 1, lambda_, kind, p);
      Interval seed = detail::series_interval(top, lambda_, kind, p);
      std::vector<HPReal> lo(block_ + 1, HPReal(p, nullptr)), hi(block_ + 1, HPReal(p, nullptr));
      lo[block_] = hi_seed.lo;
      hi[block_] = hi_seed.hi;
      lo[block_ - 1] = seed.lo;
      hi[block_ - 1] = seed.hi;
      HPReal lam_lo(lambda_, p, Round::Down), lam_hi(lambda_, p, Round::Up);
      HPReal c(p, nullptr), t(p, nullptr);
      for (std::uint64_t i = block_ - 1; i > 0; --i) {
        std::uint64_t v = first + i;
        mpfr_ui_div(c.get(), 2 * v, lam_hi.get(), MPFR_RNDD);
        mpfr_mul(t.get(), c.get(), lo[i].get(), MPFR_RNDD);
        mpfr_add(lo[i - 1].get(), lo[i + 1].get(), t.get(), MPFR_RNDD);
        mpfr_ui_div(c.get(), 2 * v, lam_lo.get(), MPFR_RNDU);
        mpfr_mul(t.get(), c.get(), hi[i].get(), MPFR_RNDU);
        mpfr_add(hi[i - 1].get(), hi[i + 1].get(), t.get(), MPFR_RNDU);
      }
      std::vector<Entry> out;
      out.reserve(block_);
      bool ok = true;
      for (std::uint64_t i = 0; i < block_; ++i) {
        std::uint64_t v = first + i;
        bool negate = kind == detail::CoeffKind::A && (v % 2 == 1);
        CoeffValue cv = detail::to_coeff({lo[i], hi[i]}, negate);
        if (!detail::radius_ok(cv, p_target_)) {
          ok = false;
          break;
        }
        out.push_back({std::move(cv), lo[i], hi[i]});
      }
      if (ok) return out;
    }
  }

  HPReal lambda_;
  Target target_;
  long p_target_;
  std::uint64_t block_ = 256;
  std::map<std::uint64_t, std::vector<Entry>> blocks_;
};

/// Certified tail bracket for a table: upper >= sum_{j>=D} |a_j| and
/// lower <= (1/2 sum_{k>=D} a_k^2 / k)^(1/2). Terms are summed explicitly up to the
/// first V at which the ratio-bound remainder is below 2^-p_target of the partial sum.
inline TailBounds tail_bounds(CoefficientTable& table, std::uint64_t D) {
  if (D < 1) throw DomainError("tail_bounds: D must be >= 1");
  long p = table.abs_hi(D).precision();
  HPReal s_hi(0, p), s_lo(0, p), sq_lo(0, p), t(p, nullptr);
  const std::uint64_t limit = D + (1ull << 26);
  std::uint64_t V = D;
  HPReal rem(0, p);
  for (std::uint64_t v = D;; ++v) {
    if (v > limit) throw CutoffValidationError("tail_bounds: remainder bound never certified");
    const HPReal& hi = table.abs_hi(v);
    const HPReal& lo = table.abs_lo(v);
    mpfr_add(s_hi.get(), s_hi.get(), hi.get(), MPFR_RNDU);
    mpfr_add(s_lo.get(), s_lo.get(), lo.get(), MPFR_RNDD);
    mpfr_sqr(t.get(), lo.get(), MPFR_RNDD);
    mpfr_div_ui(t.get(), t.get(), v, MPFR_RNDD);
    mpfr_add(sq_lo.get(), sq_lo.get(), t.get(), MPFR_RNDD);
    rem = table.remainder_after(v);
    if (rem.is_finite() && rem <= ldexp(s_lo, -table.p_target())) {
      V = v;
      break;
    }
  }
  TailBounds out;
  out.D = D;
  out.lambda = table.lambda();
  out.target = table.target();
  out.upper = add(s_hi, rem, Round::Up);
  out.lower = sqrt(ldexp(sq_lo, -1), Round::Down);
  out.V = V;
  return out;
}

inline TailBounds tail_bounds(std::uint64_t D, const HPReal& lambda, Target target,
                              long p_target = kDefaultPrecision) {
  CoefficientTable table(lambda, target, p_target);
  return tail_bounds(table, D);
}

}  // namespace expdeg
