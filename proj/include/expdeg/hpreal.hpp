#pragma once

#include <mpfr.h>
#include <gmpxx.h>

#include <algorithm>
#include <climits>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "expdeg/errors.hpp"

namespace expdeg {

inline constexpr long kDefaultPrecision = 128;
inline constexpr long kMinPrecision = 64;

enum class Round { Nearest, Down, Up };

namespace detail {

inline mpfr_rnd_t rnd(Round r) {
  switch (r) {
    case Round::Down: return MPFR_RNDD;
    case Round::Up: return MPFR_RNDU;
    default: return MPFR_RNDN;
  }
}

inline Round flip(Round r) {
  if (r == Round::Down) return Round::Up;
  if (r == Round::Up) return Round::Down;
  return r;
}

inline long check_precision(long p) {
  if (p < kMinPrecision) throw DomainError("precision below 64 bits: " + std::to_string(p));
  if (p > MPFR_PREC_MAX) throw PrecisionOverflow("precision exceeds MPFR limit", p);
  return p;
}

}  // namespace detail

/// Arbitrary-precision real backed by an MPFR value.
/// Binary arithmetic carries the minimum of the operand precisions.
class HPReal {
 public:
  HPReal() : HPReal(0L, kDefaultPrecision) {}

  explicit HPReal(long prec_bits, std::nullptr_t) {
    mpfr_init2(v_, detail::check_precision(prec_bits));
    mpfr_set_zero(v_, 1);
  }

  template <std::integral I>
  explicit HPReal(I x, long prec_bits = kDefaultPrecision) : HPReal(prec_bits, nullptr) {
    if constexpr (std::is_signed_v<I>) {
      mpfr_set_si(v_, static_cast<long>(x), MPFR_RNDN);
    } else {
      mpfr_set_ui(v_, static_cast<unsigned long>(x), MPFR_RNDN);
    }
  }

  explicit HPReal(double x, long prec_bits = kDefaultPrecision) : HPReal(prec_bits, nullptr) {
    mpfr_set_d(v_, x, MPFR_RNDN);
  }

  HPReal(const mpz_class& z, long prec_bits, Round r = Round::Nearest) : HPReal(prec_bits, nullptr) {
    mpfr_set_z(v_, z.get_mpz_t(), detail::rnd(r));
  }

  HPReal(const mpq_class& q, long prec_bits, Round r = Round::Nearest) : HPReal(prec_bits, nullptr) {
    mpfr_set_q(v_, q.get_mpq_t(), detail::rnd(r));
  }

  /// Rounds `other` to `prec_bits`.
  HPReal(const HPReal& other, long prec_bits, Round r = Round::Nearest) : HPReal(prec_bits, nullptr) {
    mpfr_set(v_, other.v_, detail::rnd(r));
  }

  HPReal(const HPReal& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }

  HPReal(HPReal&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }

  HPReal& operator=(const HPReal& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }

  HPReal& operator=(HPReal&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }

  ~HPReal() { mpfr_clear(v_); }

  /// Parses a decimal or hex-float string directly, rounding once.
  static HPReal parse(std::string_view s, long prec_bits = kDefaultPrecision,
                      Round r = Round::Nearest) {
    HPReal out(prec_bits, nullptr);
    std::string buf(s);
    auto first = buf.find_first_not_of(" \t\r\n");
    auto last = buf.find_last_not_of(" \t\r\n");
    if (first == std::string::npos) throw ParseError("empty number");
    buf = buf.substr(first, last - first + 1);
    char* end = nullptr;
    mpfr_strtofr(out.v_, buf.c_str(), &end, 0, detail::rnd(r));
    if (end == buf.c_str() || *end != '\0') throw ParseError("not a number: '" + buf + "'");
    return out;
  }

  static HPReal pi(long prec_bits = kDefaultPrecision, Round r = Round::Nearest) {
    HPReal out(prec_bits, nullptr);
    mpfr_const_pi(out.v_, detail::rnd(r));
    return out;
  }

  static HPReal ln2(long prec_bits = kDefaultPrecision, Round r = Round::Nearest) {
    HPReal out(prec_bits, nullptr);
    mpfr_const_log2(out.v_, detail::rnd(r));
    return out;
  }

  static HPReal infinity(long prec_bits = kDefaultPrecision) {
    HPReal out(prec_bits, nullptr);
    mpfr_set_inf(out.v_, 1);
    return out;
  }

  /// Exactly `2^e`.
  static HPReal pow2(long e, long prec_bits = kDefaultPrecision) {
    HPReal out(prec_bits, nullptr);
    mpfr_set_ui_2exp(out.v_, 1, e, MPFR_RNDN);
    return out;
  }

  long precision() const { return static_cast<long>(mpfr_get_prec(v_)); }
  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  double to_double(Round r = Round::Nearest) const { return mpfr_get_d(v_, detail::rnd(r)); }

  /// Binary exponent e with 2^(e-1) <= |x| < 2^e; zero maps to LONG_MIN / 2.
  long exponent() const {
    if (is_zero() || !is_finite()) return LONG_MIN / 2;
    return static_cast<long>(mpfr_get_exp(v_));
  }

  mpq_class to_mpq() const {
    if (!is_finite()) throw DomainError("non-finite value has no rational form");
    if (is_zero()) return mpq_class(0);
    mpz_class m;
    long e = static_cast<long>(mpfr_get_z_2exp(m.get_mpz_t(), v_));
    mpq_class q(m);
    if (e >= 0) {
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else {
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    q.canonicalize();
    return q;
  }

  /// Scientific decimal string; digits == 0 picks enough digits to round-trip.
  std::string to_decimal(std::size_t digits = 0) const {
    if (is_nan()) return "nan";
    if (!is_finite()) return sign() < 0 ? "-inf" : "inf";
    if (is_zero()) return "0";
    if (digits == 0) digits = mpfr_get_str_ndigits(10, mpfr_get_prec(v_));
    mpfr_exp_t e10 = 0;
    char* raw = mpfr_get_str(nullptr, &e10, 10, digits, v_, MPFR_RNDN);
    std::string s(raw);
    mpfr_free_str(raw);
    std::string out;
    if (s[0] == '-') {
      out.push_back('-');
      s.erase(0, 1);
    }
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    out.push_back(s[0]);
    if (s.size() > 1) {
      out.push_back('.');
      out.append(s, 1, std::string::npos);
    }
    long exp10 = static_cast<long>(e10) - 1;
    if (exp10 != 0) out += "e" + std::to_string(exp10);
    return out;
  }

  /// Exact hexadecimal float ("0x1.8p+1").
  std::string to_hex() const {
    if (!is_finite()) return to_decimal();
    char* raw = nullptr;
    mpfr_asprintf(&raw, "%Ra", v_);
    std::string s(raw);
    mpfr_free_str(raw);
    return s;
  }

  // Compound assignment keeps this value's precision.
  HPReal& operator+=(const HPReal& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator-=(const HPReal& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator*=(const HPReal& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  HPReal& operator/=(const HPReal& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

  HPReal operator-() const {
    HPReal out(*this);
    mpfr_neg(out.v_, out.v_, MPFR_RNDN);
    return out;
  }

 private:
  mpfr_t v_;
};

inline long min_prec(const HPReal& a, const HPReal& b) { return std::min(a.precision(), b.precision()); }

// Directed-rounding binary operations at the minimum operand precision.
#define EXPDEG_BINOP(name, fn)                                                 \
  inline HPReal name(const HPReal& a, const HPReal& b, Round r = Round::Nearest) { \
    HPReal out(min_prec(a, b), nullptr);                                        \
    fn(out.get(), a.get(), b.get(), detail::rnd(r));                            \
    return out;                                                                 \
  }
EXPDEG_BINOP(add, mpfr_add)
EXPDEG_BINOP(sub, mpfr_sub)
EXPDEG_BINOP(mul, mpfr_mul)
EXPDEG_BINOP(div, mpfr_div)
EXPDEG_BINOP(pow, mpfr_pow)
#undef EXPDEG_BINOP

#define EXPDEG_UNOP(name, fn)                                          \
  inline HPReal name(const HPReal& a, Round r = Round::Nearest) {      \
    HPReal out(a.precision(), nullptr);                                 \
    fn(out.get(), a.get(), detail::rnd(r));                             \
    return out;                                                         \
  }
EXPDEG_UNOP(sqrt, mpfr_sqrt)
EXPDEG_UNOP(log, mpfr_log)
EXPDEG_UNOP(log1p, mpfr_log1p)
EXPDEG_UNOP(exp, mpfr_exp)
EXPDEG_UNOP(expm1, mpfr_expm1)
EXPDEG_UNOP(asinh, mpfr_asinh)
EXPDEG_UNOP(acosh, mpfr_acosh)
EXPDEG_UNOP(cos, mpfr_cos)
EXPDEG_UNOP(sin, mpfr_sin)
EXPDEG_UNOP(abs, mpfr_abs)
EXPDEG_UNOP(sqr, mpfr_sqr)
EXPDEG_UNOP(floor, mpfr_rint_floor)
EXPDEG_UNOP(ceil, mpfr_rint_ceil)
#undef EXPDEG_UNOP

/// log Gamma(x) for x > 0.
inline HPReal lngamma(const HPReal& a, Round r = Round::Nearest) {
  HPReal out(a.precision(), nullptr);
  mpfr_lngamma(out.get(), a.get(), detail::rnd(r));
  return out;
}

inline HPReal pow_si(const HPReal& a, long k, Round r = Round::Nearest) {
  HPReal out(a.precision(), nullptr);
  mpfr_pow_si(out.get(), a.get(), k, detail::rnd(r));
  return out;
}

/// a * 2^e, exact.
inline HPReal ldexp(const HPReal& a, long e) {
  HPReal out(a.precision(), nullptr);
  mpfr_mul_2si(out.get(), a.get(), e, MPFR_RNDN);
  return out;
}

inline HPReal max(const HPReal& a, const HPReal& b) { return mpfr_cmp(a.get(), b.get()) >= 0 ? a : b; }
inline HPReal min(const HPReal& a, const HPReal& b) { return mpfr_cmp(a.get(), b.get()) <= 0 ? a : b; }

inline HPReal operator+(const HPReal& a, const HPReal& b) { return add(a, b); }
inline HPReal operator-(const HPReal& a, const HPReal& b) { return sub(a, b); }
inline HPReal operator*(const HPReal& a, const HPReal& b) { return mul(a, b); }
inline HPReal operator/(const HPReal& a, const HPReal& b) { return div(a, b); }

template <class T>
concept Arithmetic = std::is_arithmetic_v<T>;

// Machine scalars convert exactly at >= 64 bits, then take the HPReal's precision.
template <Arithmetic T> HPReal operator+(const HPReal& a, T b) { return a + HPReal(b, a.precision()); }
template <Arithmetic T> HPReal operator-(const HPReal& a, T b) { return a - HPReal(b, a.precision()); }
template <Arithmetic T> HPReal operator*(const HPReal& a, T b) { return a * HPReal(b, a.precision()); }
template <Arithmetic T> HPReal operator/(const HPReal& a, T b) { return a / HPReal(b, a.precision()); }
template <Arithmetic T> HPReal operator+(T a, const HPReal& b) { return HPReal(a, b.precision()) + b; }
template <Arithmetic T> HPReal operator-(T a, const HPReal& b) { return HPReal(a, b.precision()) - b; }
template <Arithmetic T> HPReal operator*(T a, const HPReal& b) { return HPReal(a, b.precision()) * b; }
template <Arithmetic T> HPReal operator/(T a, const HPReal& b) { return HPReal(a, b.precision()) / b; }

inline int compare(const HPReal& a, const HPReal& b) { return mpfr_cmp(a.get(), b.get()); }
inline bool operator==(const HPReal& a, const HPReal& b) { return mpfr_equal_p(a.get(), b.get()) != 0; }
inline bool operator<(const HPReal& a, const HPReal& b) { return mpfr_less_p(a.get(), b.get()) != 0; }
inline bool operator>(const HPReal& a, const HPReal& b) { return mpfr_greater_p(a.get(), b.get()) != 0; }
inline bool operator<=(const HPReal& a, const HPReal& b) { return mpfr_lessequal_p(a.get(), b.get()) != 0; }
inline bool operator>=(const HPReal& a, const HPReal& b) { return mpfr_greaterequal_p(a.get(), b.get()) != 0; }

template <Arithmetic T> bool operator<(const HPReal& a, T b) { return mpfr_cmp_d(a.get(), static_cast<double>(b)) < 0; }
template <Arithmetic T> bool operator>(const HPReal& a, T b) { return mpfr_cmp_d(a.get(), static_cast<double>(b)) > 0; }
template <Arithmetic T> bool operator<=(const HPReal& a, T b) { return mpfr_cmp_d(a.get(), static_cast<double>(b)) <= 0; }
template <Arithmetic T> bool operator>=(const HPReal& a, T b) { return mpfr_cmp_d(a.get(), static_cast<double>(b)) >= 0; }

/// Bit-exact identity: same precision and same value (NaNs compare equal).
inline bool identical(const HPReal& a, const HPReal& b) {
  if (a.precision() != b.precision()) return false;
  if (a.is_nan() || b.is_nan()) return a.is_nan() && b.is_nan();
  return a == b && (a.sign() != 0 || mpfr_signbit(a.get()) == mpfr_signbit(b.get()));
}

/// Precision from EXPDEG_PRECISION when set and valid, else `fallback`.
inline long precision_from_env(long fallback = kDefaultPrecision) {
  const char* env = std::getenv("EXPDEG_PRECISION");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  long p = std::strtol(env, &end, 10);
  if (*end != '\0' || p < kMinPrecision) throw DomainError("EXPDEG_PRECISION must be an integer >= 64");
  return p;
}

}  // namespace expdeg
