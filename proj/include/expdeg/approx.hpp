#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expdeg/chebyshev.hpp"
#include "expdeg/coeffs.hpp"
#include "expdeg/core_math.hpp"
#include "expdeg/hpreal.hpp"

namespace expdeg {

struct ProblemSpec {
  HPReal B;
  HPReal delta;
  Target target = Target::EXP_NEG;

  HPReal lambda() const { return ldexp(B, -1); }

  void validate() const {
    if (!B.is_finite() || B < 1) throw DomainError("B must be a finite value >= 1");
    if (!delta.is_finite() || delta <= 0 || delta >= 1) throw DomainError("delta must lie in (0, 1)");
  }
};

inline ProblemSpec make_spec(const std::string& B, const std::string& delta, Target target,
                             long prec_bits = kDefaultPrecision) {
  ProblemSpec s{HPReal::parse(B, prec_bits), HPReal::parse(delta, prec_bits), target};
  s.validate();
  return s;
}

/// First D coefficients a_0..a_{D-1} of sum_j 2^(j-1) a_j Q_j on [-1, 1].
struct ChebSeries {
  HPReal lambda;
  Target target = Target::EXP_NEG;
  std::vector<CoeffValue> coeffs;

  /// H_D(x) evaluated by Clenshaw at the precision of x.
  HPReal eval(const HPReal& x) const {
    std::vector<HPReal> a;
    a.reserve(coeffs.size());
    for (const auto& c : coeffs) a.emplace_back(c.value, x.precision());
    return chebyshev_sum(a, x);
  }

  HPReal radius_sum() const {
    long p = coeffs.empty() ? kDefaultPrecision : coeffs.front().error_radius.precision();
    HPReal s(0, p);
    for (const auto& c : coeffs) s = add(s, c.error_radius, Round::Up);
    return s;
  }
};

enum class LowerWitness { TRIVIAL, TAIL_L2, CHEB_GROWTH };

inline std::string to_string(LowerWitness w) {
  switch (w) {
    case LowerWitness::TAIL_L2: return "TAIL_L2";
    case LowerWitness::CHEB_GROWTH: return "CHEB_GROWTH";
    default: return "TRIVIAL";
  }
}

inline LowerWitness parse_witness(const std::string& s) {
  if (s == "TAIL_L2") return LowerWitness::TAIL_L2;
  if (s == "CHEB_GROWTH") return LowerWitness::CHEB_GROWTH;
  if (s == "TRIVIAL") return LowerWitness::TRIVIAL;
  throw ParseError("unknown lower witness '" + s + "'");
}

/// Degrees are polynomial degrees. D_upper = d means H with coefficients a_0..a_d and
/// tail_upper_at_D = upper tail from index d+1. Every polynomial of degree < D_lower errs
/// by at least delta; for TAIL_L2, lower_value is the tail lower bound from index D_lower.
struct DegreeCertificate {
  ProblemSpec spec;
  std::uint64_t D_upper = 1;
  HPReal tail_upper_at_D;
  HPReal radius_sum;  // error radii of a_0..a_{D_upper}
  std::uint64_t D_lower = 1;
  LowerWitness lower_witness = LowerWitness::TRIVIAL;
  HPReal lower_value;
  long precision_bits = kDefaultPrecision;
};

enum class Regime { SMALL_B, CRITICAL, LARGE_B, HUGE_B };
enum class ConstantName { NONE, NU, MU, Z_STAR, SQRT };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::SMALL_B: return "SMALL_B";
    case Regime::CRITICAL: return "CRITICAL";
    case Regime::LARGE_B: return "LARGE_B";
    default: return "HUGE_B";
  }
}

inline std::string to_string(ConstantName c) {
  switch (c) {
    case ConstantName::NU: return "NU";
    case ConstantName::MU: return "MU";
    case ConstantName::Z_STAR: return "Z_STAR";
    case ConstantName::SQRT: return "SQRT";
    default: return "NONE";
  }
}

struct RegimePrediction {
  ProblemSpec spec;
  Regime regime = Regime::CRITICAL;
  HPReal rho;
  HPReal predicted_degree;
  HPReal leading_constant;
  ConstantName constant_name = ConstantName::NONE;
  // HUGE_B: the leading constant is only known to lie in [constant_lo, constant_hi].
  bool order_of_magnitude_only = false;
  HPReal constant_lo;
  HPReal constant_hi;
};

/// Working precision for certified degree search and export: the tail must be resolved
/// below delta after the prefix radii, which scale with sum |a_j| (about e^B for exp-pos).
inline long certified_precision(const ProblemSpec& spec, long prec_bits = kDefaultPrecision) {
  long bits = std::max(1L, 1 - spec.delta.exponent());
  long p = std::max(prec_bits, bits + 64);
  if (spec.target == Target::EXP_POS) {
    p += static_cast<long>(std::ceil(spec.B.to_double(Round::Up) * 1.4426950408889634)) + 8;
  }
  if (p > kPrecisionCeiling) throw PrecisionOverflow("certified precision exceeds ceiling", p);
  return p;
}

inline Regime classify_regime(const ProblemSpec& spec, HPReal* rho_out = nullptr) {
  long p = spec.B.precision();
  HPReal L = -log(HPReal(spec.delta, p));
  HPReal rho = spec.B / ldexp(L, 1);
  if (rho_out) *rho_out = rho;
  if (rho < 0.05) return Regime::SMALL_B;
  if (rho <= 20) return Regime::CRITICAL;
  if (spec.target == Target::EXP_POS) return Regime::LARGE_B;
  if (spec.B <= L * L * L) return Regime::LARGE_B;
  return Regime::HUGE_B;
}

inline RegimePrediction predict_degree(const ProblemSpec& spec, long prec_bits = kDefaultPrecision) {
  spec.validate();
  long p = std::max(prec_bits, kDefaultPrecision);
  RegimePrediction out;
  out.spec = spec;
  HPReal B(spec.B, p);
  HPReal L = -log(HPReal(spec.delta, p));
  out.regime = classify_regime(spec, &out.rho);
  out.rho = HPReal(out.rho, p);
  out.leading_constant = HPReal(1, p);
  out.constant_lo = out.constant_hi = out.leading_constant;
  switch (out.regime) {
    case Regime::SMALL_B:
      out.predicted_degree = L / log(L / B);
      out.constant_name = ConstantName::NONE;
      break;
    case Regime::CRITICAL:
      if (spec.target == Target::EXP_NEG) {
        out.leading_constant = solve_nu(out.rho);
        out.constant_name = ConstantName::NU;
      } else {
        out.leading_constant = solve_mu(out.rho);
        out.constant_name = ConstantName::MU;
      }
      out.constant_lo = out.constant_hi = out.leading_constant;
      out.predicted_degree = out.leading_constant * out.rho * L;
      break;
    case Regime::LARGE_B:
      if (spec.target == Target::EXP_NEG) {
        out.predicted_degree = sqrt(B * L);
        out.constant_name = ConstantName::SQRT;
      } else {
        out.leading_constant = z_star(p);
        out.constant_lo = out.constant_hi = out.leading_constant;
        out.predicted_degree = ldexp(out.leading_constant * B, -1);
        out.constant_name = ConstantName::Z_STAR;
      }
      break;
    case Regime::HUGE_B:
      out.predicted_degree = sqrt(B * L);
      out.constant_name = ConstantName::SQRT;
      out.order_of_magnitude_only = true;
      out.constant_lo = HPReal(0.5, p);
      out.constant_hi = HPReal(1, p);
      break;
  }
  return out;
}

inline ChebSeries build_series(CoefficientTable& table, std::uint64_t D) {
  if (D < 1) throw DomainError("build_series: D must be >= 1");
  ChebSeries s{table.lambda(), table.target(), {}};
  s.coeffs.reserve(D);
  for (std::uint64_t j = 0; j < D; ++j) s.coeffs.push_back(table.coeff(j));
  return s;
}

inline ChebSeries build_series(const ProblemSpec& spec, std::uint64_t D, long p_target = kDefaultPrecision) {
  spec.validate();
  CoefficientTable table(spec.lambda(), spec.target, p_target);
  return build_series(table, D);
}

struct ChebGrowthWitness {
  std::uint64_t D = 1;
  HPReal x0p;
  HPReal rhs;  // (1 - delta) / delta
};

/// Smallest d with 2 T_d(x0') >= (1 - delta)/delta, x0' = 1 + 2 ln(1/delta) / (B - ln(1/delta)).
/// Any p with sup |p - e^-x| < delta on [0, B] has 2^(deg p) Q_deg(x0') >= (1 - delta)/delta.
inline ChebGrowthWitness degree_lower_bound(const ProblemSpec& spec, long prec_bits = kDefaultPrecision) {
  spec.validate();
  if (spec.target != Target::EXP_NEG) throw DomainError("degree_lower_bound: target must be exp-neg");
  if (spec.delta >= 0.25) throw DomainError("degree_lower_bound: requires delta < 1/4");
  long p = std::max(prec_bits, kDefaultPrecision) + 64;
  HPReal delta(spec.delta, p);
  HPReal L = -log(delta);
  HPReal B(spec.B, p);
  if (B <= L) throw DomainError("degree_lower_bound: requires B > ln(1/delta)");
  ChebGrowthWitness w;
  w.x0p = 1 + ldexp(L, 1) / (B - L);
  w.rhs = (1 - delta) / delta;
  // Rounding slack on the left side keeps the returned degree conservative.
  HPReal slack = 1 + HPReal::pow2(-(p - 32), p);
  auto holds = [&](std::uint64_t d) {
    HPReal lhs = ldexp(cheb_eval(d, w.x0p), static_cast<long>(d)) * slack;
    return lhs >= w.rhs;
  };
  std::uint64_t lo = 0, hi = 1;
  while (!holds(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > (1ull << 40)) throw ConvergenceError("degree_lower_bound: growth search diverged");
  }
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (holds(mid)) hi = mid; else lo = mid;
  }
  w.D = std::max<std::uint64_t>(hi, 1);
  return w;
}

inline constexpr std::uint64_t kMaxSearchDegree = 1ull << 22;

namespace detail {

// Memoized tail and radius evaluation over one coefficient table.
class DegreeSearch {
 public:
  DegreeSearch(const ProblemSpec& spec, long p)
      : spec_(spec), table_(spec.lambda(), spec.target, p), delta_(spec.delta, p) {}

  CoefficientTable& table() { return table_; }

  const TailBounds& tail(std::uint64_t D) {
    auto it = tails_.find(D);
    if (it == tails_.end()) it = tails_.emplace(D, tail_bounds(table_, D)).first;
    return it->second;
  }

  HPReal radius_prefix(std::uint64_t d) {
    while (prefix_.size() <= d) {
      std::uint64_t j = prefix_.size();
      const HPReal& r = table_.coeff(j).error_radius;
      prefix_.push_back(j == 0 ? r : add(prefix_.back(), r, Round::Up));
    }
    return prefix_[d];
  }

  HPReal upper_total(std::uint64_t d) { return add(tail(d + 1).upper, radius_prefix(d), Round::Up); }
  bool upper_ok(std::uint64_t d) { return upper_total(d) < delta_; }
  bool lower_fails(std::uint64_t d) { return tail(d + 1).lower >= delta_; }

 private:
  ProblemSpec spec_;
  CoefficientTable table_;
  HPReal delta_;
  std::map<std::uint64_t, TailBounds> tails_;
  std::vector<HPReal> prefix_;
};

}  // namespace detail

inline DegreeCertificate find_degree(const ProblemSpec& spec, long prec_bits = kDefaultPrecision) {
  spec.validate();
  long p = certified_precision(spec, prec_bits);
  detail::DegreeSearch search(spec, p);

  RegimePrediction pred = predict_degree(spec, prec_bits);
  double seed_d = pred.predicted_degree.to_double();
  std::uint64_t seed = 1;
  if (std::isfinite(seed_d) && seed_d > 1) seed = static_cast<std::uint64_t>(std::min(seed_d, 1.0e7));

  // Exponential bracketing from the prediction, then bisection on the monotone tail.
  std::uint64_t lo = 0, hi = 0;
  if (search.upper_ok(seed)) {
    hi = seed;
    lo = seed;
    while (lo > 1) {
      lo = std::max<std::uint64_t>(1, lo / 2);
      if (!search.upper_ok(lo)) break;
      hi = lo;
    }
    if (search.upper_ok(lo)) hi = lo;
  } else {
    lo = seed;
    hi = seed * 2;
    while (!search.upper_ok(hi)) {
      lo = hi;
      hi *= 2;
      if (hi > kMaxSearchDegree) throw CapacityError("degree search exceeds maximum degree", hi);
    }
  }
  while (hi - lo > 1 && lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (search.upper_ok(mid)) hi = mid; else lo = mid;
  }

  DegreeCertificate cert;
  cert.spec = spec;
  cert.precision_bits = p;
  cert.D_upper = hi;
  cert.tail_upper_at_D = search.tail(hi + 1).upper;
  cert.radius_sum = search.radius_prefix(hi);

  // Largest degree that the tail lower bound rules out.
  cert.D_lower = 1;
  cert.lower_witness = LowerWitness::TRIVIAL;
  cert.lower_value = HPReal(0, p);
  if (search.lower_fails(0)) {
    std::uint64_t a = 0, b = cert.D_upper;
    if (search.lower_fails(b)) throw SoundnessError("tail lower bound exceeds delta at the certified degree");
    while (b - a > 1) {
      std::uint64_t mid = a + (b - a) / 2;
      if (search.lower_fails(mid)) a = mid; else b = mid;
    }
    cert.D_lower = a + 1;
    cert.lower_witness = LowerWitness::TAIL_L2;
    cert.lower_value = search.tail(a + 1).lower;
  }
  HPReal L = -log(HPReal(spec.delta, p));
  if (spec.target == Target::EXP_NEG && spec.delta < 0.25 && spec.B > L) {
    ChebGrowthWitness w = degree_lower_bound(spec, prec_bits);
    if (w.D > cert.D_upper) throw SoundnessError("Chebyshev growth witness exceeds the certified degree");
    if (w.D > cert.D_lower) {
      cert.D_lower = w.D;
      cert.lower_witness = LowerWitness::CHEB_GROWTH;
      cert.lower_value = HPReal(w.rhs, p);
    }
  }
  return cert;
}

/// Degree-d polynomial on [0, B]: Chebyshev form in x = 2z/B - 1 plus exact monomial form in z.
struct ExportedPolynomial {
  std::uint64_t degree = 0;
  HPReal domain_B;
  ChebSeries cheb_form;
  std::vector<mpq_class> monomial_form;
  DegreeCertificate certificate;
  HPReal rounding_bound;  // sum over k of |rounding of c_k| B^k
  HPReal error_bound;     // tail + radii + rounding, certified < delta

  Target target() const { return cheb_form.target; }

  HPReal to_unit(const HPReal& z) const { return ldexp(z / HPReal(domain_B, z.precision()), 1) - 1; }

  HPReal eval_cheb(const HPReal& z) const { return cheb_form.eval(to_unit(z)); }

  HPReal eval_monomial(const HPReal& z) const {
    HPReal acc(0, z.precision());
    for (std::size_t k = monomial_form.size(); k-- > 0;) {
      acc = acc * z + HPReal(monomial_form[k], z.precision());
    }
    return acc;
  }

  /// Precision that resolves the Chebyshev sum to about 2^-64 of its coefficient mass.
  long eval_precision() const {
    long p = cheb_form.coeffs.empty() ? kDefaultPrecision : cheb_form.coeffs.front().value.precision();
    return std::max(p, kDefaultPrecision);
  }
};

inline HPReal target_value(Target t, const HPReal& z) { return t == Target::EXP_NEG ? exp(-z) : exp(z); }

inline long p_bits(const mpz_class& z) { return z == 0 ? 0 : static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2)); }

/// Bit budget P(d) = 64 (d+2)^2 on each numerator and denominator.
inline std::uint64_t monomial_bit_budget(std::uint64_t d) { return 64ull * (d + 2) * (d + 2); }

inline constexpr std::uint64_t kMaxExportDegree = 4096;

namespace detail {

// Exact monomial coefficients in z of sum_j c_j T_j(2z/B - 1), with c_0 = a_0/2.
inline std::vector<mpq_class> cheb_to_monomial(const std::vector<HPReal>& c, const mpq_class& B) {
  const std::size_t n = c.size();
  // c_j = M_j 2^e_j; scale all to a common power 2^-E.
  std::vector<mpz_class> M(n);
  std::vector<long> e(n);
  long emin = 0;
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (c[j].is_zero()) continue;
    e[j] = static_cast<long>(mpfr_get_z_2exp(M[j].get_mpz_t(), c[j].get()));
    emin = any ? std::min(emin, e[j]) : e[j];
    any = true;
  }
  std::vector<mpz_class> acc(n, 0);
  if (!any) return std::vector<mpq_class>(n, mpq_class(0));
  // Rows of shifted Chebyshev integers: T*_{j+1} = (4u - 2) T*_j - T*_{j-1}, u = z/B.
  std::vector<mpz_class> prev(n, 0), cur(n, 0), next(n, 0);
  prev[0] = 1;
  if (n > 1) {
    cur[0] = -1;
    cur[1] = 2;
  }
  auto accumulate = [&](std::size_t j, const std::vector<mpz_class>& row) {
    if (c[j].is_zero()) return;
    mpz_class Cj = M[j];
    mpz_mul_2exp(Cj.get_mpz_t(), Cj.get_mpz_t(), static_cast<mp_bitcnt_t>(e[j] - emin));
    for (std::size_t k = 0; k <= j; ++k) {
      if (row[k] != 0) acc[k] += Cj * row[k];
    }
  };
  accumulate(0, prev);
  if (n > 1) accumulate(1, cur);
  for (std::size_t j = 2; j < n; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      mpz_class v = -2 * cur[k] - prev[k];
      if (k > 0) v += 4 * cur[k - 1];
      next[k] = v;
    }
    accumulate(j, next);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  std::vector<mpq_class> out(n);
  mpq_class Bk(1);
  for (std::size_t k = 0; k < n; ++k) {
    mpq_class q(acc[k]);
    if (emin >= 0) {
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(emin));
    } else {
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-emin));
    }
    out[k] = q / Bk;
    out[k].canonicalize();
    Bk *= B;
  }
  return out;
}

// Nearest multiple of 2^-s.
inline mpq_class round_dyadic(const mpq_class& x, long s) {
  mpq_class scaled = x;
  if (s >= 0) {
    mpq_mul_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<mp_bitcnt_t>(s));
  } else {
    mpq_div_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<mp_bitcnt_t>(-s));
  }
  mpz_class twice_num = 2 * scaled.get_num() + scaled.get_den();
  mpz_class den2 = 2 * scaled.get_den();
  mpz_class n;
  mpz_fdiv_q(n.get_mpz_t(), twice_num.get_mpz_t(), den2.get_mpz_t());
  mpq_class out(n);
  if (s >= 0) {
    mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(s));
  } else {
    mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(-s));
  }
  out.canonicalize();
  return out;
}

}  // namespace detail

/// Builds H_{D_upper+1} and its monomial form with dyadic coefficients. The rounding budget
/// is min(delta/4, delta 2^-80, slack/2) with slack = delta - tail - radii, split across
/// degree k as budget / ((d+1) max(1,B)^k), so the total error stays below delta.
inline ExportedPolynomial export_polynomial(const ProblemSpec& spec, const DegreeCertificate& cert) {
  spec.validate();
  const std::uint64_t d = cert.D_upper;
  if (d > kMaxExportDegree) throw CapacityError("export degree exceeds maximum", d);
  long p = cert.precision_bits;
  HPReal delta(spec.delta, p);
  HPReal used = add(cert.tail_upper_at_D, cert.radius_sum, Round::Up);
  if (!(used < delta)) throw SoundnessError("certificate does not certify the requested tolerance");

  ExportedPolynomial out;
  out.degree = d;
  out.domain_B = spec.B;
  out.certificate = cert;
  CoefficientTable table(spec.lambda(), spec.target, p);
  out.cheb_form = build_series(table, d + 1);

  std::vector<HPReal> c;
  c.reserve(d + 1);
  for (std::uint64_t j = 0; j <= d; ++j) c.push_back(out.cheb_form.coeffs[j].value);
  c[0] = ldexp(c[0], -1);
  mpq_class Bq = spec.B.to_mpq();
  std::vector<mpq_class> exact = detail::cheb_to_monomial(c, Bq);

  HPReal slack = sub(delta, used, Round::Down);
  HPReal budget = min(min(ldexp(delta, -2), ldexp(delta, -80)), ldexp(slack, -1));
  HPReal maxB = max(HPReal(spec.B, p), HPReal(1, p));
  HPReal per = div(budget, HPReal(d + 1, p), Round::Down);
  HPReal rounding(0, p);
  HPReal Bk(1, p);
  HPReal Bk_up(1, p);
  out.monomial_form.resize(d + 1);
  const std::uint64_t bit_budget = monomial_bit_budget(d);
  for (std::uint64_t k = 0; k <= d; ++k) {
    HPReal bk = div(per, Bk, Round::Down);
    long s = 1 - bk.exponent();  // 2^-s <= bk
    out.monomial_form[k] = detail::round_dyadic(exact[k], s);
    mpq_class err = abs(out.monomial_form[k] - exact[k]);
    rounding = add(rounding, mul(HPReal(err, p, Round::Up), Bk_up, Round::Up), Round::Up);
    if (static_cast<std::uint64_t>(p_bits(out.monomial_form[k].get_num())) > bit_budget ||
        static_cast<std::uint64_t>(p_bits(out.monomial_form[k].get_den())) > bit_budget) {
      throw CapacityError("monomial coefficient exceeds the P(d) bit budget", bit_budget);
    }
    Bk = mul(Bk, maxB, Round::Up);
    Bk_up = mul(Bk_up, HPReal(spec.B, p), Round::Up);
  }
  out.rounding_bound = rounding;
  out.error_bound = add(used, rounding, Round::Up);
  if (!(out.error_bound < delta)) throw SoundnessError("export error budget exceeds delta");

  // Agreement of the two forms at 64 Chebyshev nodes of [0, B].
  // |m_k| B^k <= sum_j |c_j| (3 + 2 sqrt 2)^j bounds the Horner cancellation.
  long pe = out.eval_precision() + 64 + static_cast<long>(std::ceil(2.55 * static_cast<double>(d + 1)));
  HPReal Bp(spec.B, pe);
  HPReal pi = HPReal::pi(pe);
  HPReal floor_mag(delta, pe);
  HPReal tol_scale = HPReal::pow2(-40, pe);
  for (int i = 0; i < 64; ++i) {
    HPReal x = cos(pi * HPReal(2 * i + 1, pe) / HPReal(128, pe));
    HPReal z = ldexp(Bp * (x + 1), -1);
    HPReal a = out.eval_cheb(z);
    HPReal b = out.eval_monomial(z);
    HPReal scale = max(max(abs(a), abs(b)), floor_mag);
    if (abs(a - b) > tol_scale * scale) {
      throw SoundnessError("Chebyshev and monomial forms disagree at a sample node");
    }
  }
  return out;
}

/// Chebyshev-spaced nodes z_i = B (1 + cos(pi (i + 1/2) / N)) / 2 for i < N, plus 0 and B.
inline std::vector<HPReal> chebyshev_grid(const HPReal& B, std::uint64_t N, long prec) {
  std::vector<HPReal> z;
  z.reserve(N + 2);
  HPReal Bp(B, prec);
  HPReal pi = HPReal::pi(prec);
  z.emplace_back(0, prec);
  for (std::uint64_t i = 0; i < N; ++i) {
    HPReal x = cos(pi * (HPReal(i, prec) + 0.5) / HPReal(N, prec));
    z.push_back(ldexp(Bp * (x + 1), -1));
  }
  z.push_back(Bp);
  return z;
}

inline HPReal measure_sup_error(const ExportedPolynomial& poly, const ProblemSpec& spec,
                                std::uint64_t grid_factor = 16) {
  if (grid_factor < 4) throw DomainError("measure_sup_error: grid_factor must be >= 4");
  long pe = poly.eval_precision() + 32;
  HPReal worst(0, pe);
  for (const HPReal& z : chebyshev_grid(spec.B, grid_factor * (poly.degree + 1), pe)) {
    HPReal err = abs(poly.eval_cheb(z) - target_value(spec.target, z));
    if (err > worst) worst = err;
  }
  return worst;
}

/// Wraps explicit Chebyshev coefficients (a_0..a_d, exact radii zero) as a polynomial.
inline ExportedPolynomial polynomial_from_cheb(const ProblemSpec& spec, const std::vector<HPReal>& a) {
  ExportedPolynomial out;
  out.degree = a.empty() ? 0 : a.size() - 1;
  out.domain_B = spec.B;
  out.cheb_form.lambda = spec.lambda();
  out.cheb_form.target = spec.target;
  for (const auto& v : a) out.cheb_form.coeffs.push_back({v, HPReal(0, v.precision())});
  std::vector<HPReal> c = a;
  if (!c.empty()) c[0] = ldexp(c[0], -1);
  out.monomial_form = detail::cheb_to_monomial(c, spec.B.to_mpq());
  out.certificate.spec = spec;
  return out;
}

}  // namespace expdeg
