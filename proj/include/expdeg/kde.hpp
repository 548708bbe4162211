#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "expdeg/approx.hpp"
#include "expdeg/core_math.hpp"
#include "expdeg/double_double.hpp"
#include "expdeg/errors.hpp"
#include "expdeg/hpreal.hpp"
#include "expdeg/multi_index.hpp"

namespace expdeg {

/// Batch Gaussian KDE input: query points X, data points Y (row-major n x m), weights w.
struct KdeInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> X;
  std::vector<double> Y;
  std::vector<double> w;
  HPReal delta;
  std::optional<HPReal> B;

  const double* x(std::size_t i) const { return X.data() + i * m; }
  const double* y(std::size_t j) const { return Y.data() + j * m; }

  void validate() const {
    if (n < 1 || m < 1) throw DomainError("kde instance: n and m must be >= 1");
    if (X.size() != n * m || Y.size() != n * m) throw DomainError("kde instance: point arrays must be n x m");
    if (w.size() != n) throw DomainError("kde instance: weight vector must have length n");
    for (double v : X) {
      if (!std::isfinite(v)) throw DomainError("kde instance: non-finite coordinate");
    }
    for (double v : Y) {
      if (!std::isfinite(v)) throw DomainError("kde instance: non-finite coordinate");
    }
    for (double v : w) {
      if (!std::isfinite(v)) throw DomainError("kde instance: non-finite weight");
    }
    if (!delta.is_finite() || delta <= 0 || delta >= 1) throw DomainError("kde instance: delta must lie in (0, 1)");
    if (B && (!B->is_finite() || *B < 1)) throw DomainError("kde instance: B must be >= 1");
  }
};

inline constexpr std::uint64_t kDefaultTermCeiling = 1ull << 24;

/// C(2m + 2d, 2d) as an exact decimal string (it may exceed 64 bits).
inline std::string column_count_string(std::uint64_t m, std::uint64_t d) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), 2 * m + 2 * d, 2 * d);
  return r.get_str();
}

/// Coefficients b_a of p(sum_l (x_l - y_l)^2) = sum_a b_a x^alpha y^beta over the multi-indices
/// a = (alpha, beta) of total degree <= 2d. Only the nonzero b_a are stored, grouped by alpha:
/// b_a != 0 requires alpha_l + beta_l = 2 c_l for every l, and then
///   b_a = p_k k! / prod c_l! * prod C(2 c_l, alpha_l) * (-1)^{|beta|},  k = sum c_l.
struct FeatureMap {
  std::size_t m = 0;
  std::uint64_t d = 0;
  std::uint64_t M = 0;  // C(2m + 2d, 2d), all multi-indices including zero coefficients
  HPReal domain_B;
  std::vector<mpq_class> poly;
  MonomialTable half;  // m-variable monomials of degree <= 2d
  std::vector<std::uint64_t> row_start;  // CSR over alpha ranks
  std::vector<std::uint32_t> beta;
  std::vector<DoubleDouble> b;

  std::uint64_t nonzero() const { return b.size(); }

  /// All M multi-indices in graded lexicographic order over (x_1..x_m, y_1..y_m).
  std::vector<std::vector<std::uint16_t>> indices(std::uint64_t ceiling = 1ull << 22) const {
    if (d == 0) return {std::vector<std::uint16_t>(2 * m, 0)};
    return enumerate_multi_indices(m, d, ceiling);
  }

  /// Exact b_a for a = (alpha, beta), each of length m.
  mpq_class coefficient(const std::uint16_t* alpha, const std::uint16_t* beta_exp) const {
    std::uint64_t k = 0, sign = 0;
    for (std::size_t l = 0; l < m; ++l) {
      unsigned s = alpha[l] + beta_exp[l];
      if (s % 2 != 0) return 0;
      k += s / 2;
      sign += beta_exp[l];
    }
    if (k > d) return 0;
    mpz_class num, t;
    mpz_fac_ui(num.get_mpz_t(), k);
    for (std::size_t l = 0; l < m; ++l) {
      unsigned c = (alpha[l] + beta_exp[l]) / 2;
      mpz_fac_ui(t.get_mpz_t(), c);
      mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), t.get_mpz_t());
      mpz_bin_uiui(t.get_mpz_t(), 2 * c, alpha[l]);
      num *= t;
    }
    mpq_class out = poly[k] * mpq_class(num);
    return sign % 2 == 0 ? out : mpq_class(-out);
  }

  mpq_class coefficient(const std::vector<std::uint16_t>& a) const { return coefficient(a.data(), a.data() + m); }
};

namespace detail {

inline DoubleDouble to_double_double(const mpq_class& q) {
  HPReal v(q, 256);
  double hi = v.to_double();
  double lo = (v - HPReal(hi, 256)).to_double();
  double s, e;
  fast_two_sum(hi, lo, s, e);
  return {s, e};
}

// Number of nonzero coefficients: sum over |c| <= d of prod_l (2 c_l + 1).
inline std::uint64_t count_nonzero_terms(const MonomialTable& ctab) {
  unsigned __int128 total = 0;
  for (std::uint64_t r = 0; r < ctab.size(); ++r) {
    const std::uint16_t* c = ctab.exponents(r);
    unsigned __int128 prod = 1;
    for (std::size_t l = 0; l < ctab.nvars(); ++l) prod *= 2u * c[l] + 1u;
    total += prod;
    if (total > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace detail

/// Expands p(||x - y||^2) over 2m variables. The ceiling bounds the stored work
/// (distinct monomials and nonzero coefficients); the error reports M.
inline FeatureMap expand_kernel_poly(const ExportedPolynomial& poly, std::size_t m,
                                     std::uint64_t ceiling = kDefaultTermCeiling) {
  if (m < 1) throw DomainError("expand_kernel_poly: m must be >= 1");
  if (poly.monomial_form.empty()) throw DomainError("expand_kernel_poly: polynomial has no monomial form");
  FeatureMap fm;
  fm.m = m;
  fm.d = poly.monomial_form.size() - 1;
  fm.poly = poly.monomial_form;
  fm.domain_B = poly.domain_B;
  const std::string M_str = column_count_string(m, fm.d);
  auto capacity = [&](const std::string& what) {
    mpz_class Mz(M_str);
    std::uint64_t req = mpz_fits_ulong_p(Mz.get_mpz_t()) ? Mz.get_ui() : std::numeric_limits<std::uint64_t>::max();
    return CapacityError(what + " (M = " + M_str + ")", req);
  };
  {
    mpz_class H;
    mpz_bin_uiui(H.get_mpz_t(), m + 2 * fm.d, 2 * fm.d);
    if (H > mpz_class(static_cast<unsigned long>(ceiling))) throw capacity("feature map exceeds the term ceiling");
    mpz_class Mz(M_str);
    if (!mpz_fits_ulong_p(Mz.get_mpz_t())) throw capacity("feature count exceeds 64 bits");
    fm.M = Mz.get_ui();
  }
  fm.half = MonomialTable(m, 2 * fm.d);
  MonomialTable ctab(m, fm.d);
  const std::uint64_t nnz = detail::count_nonzero_terms(ctab);
  if (nnz > ceiling) throw capacity("feature map exceeds the term ceiling");

  struct Term {
    std::uint32_t alpha, beta;
    DoubleDouble b;
  };
  std::vector<Term> terms;
  terms.reserve(nnz);
  std::vector<mpz_class> fact(fm.d + 1);
  mpz_fac_ui(fact[0].get_mpz_t(), 0);
  for (std::uint64_t k = 1; k <= fm.d; ++k) fact[k] = fact[k - 1] * k;
  // binom_row[c][a] = C(2c, a)
  std::vector<std::vector<std::uint64_t>> binom_row(fm.d + 1);
  for (std::uint64_t c = 0; c <= fm.d; ++c) {
    for (std::uint64_t a = 0; a <= 2 * c; ++a) binom_row[c].push_back(binomial(2 * c, a));
  }
  std::vector<std::uint16_t> alpha(m), bet(m);
  for (std::uint64_t r = 0; r < ctab.size(); ++r) {
    const std::uint16_t* c = ctab.exponents(r);
    std::uint64_t k = 0;
    for (std::size_t l = 0; l < m; ++l) k += c[l];
    if (fm.poly[k] == 0) continue;
    mpz_class multinom = fact[k];
    for (std::size_t l = 0; l < m; ++l) mpz_divexact(multinom.get_mpz_t(), multinom.get_mpz_t(), fact[c[l]].get_mpz_t());
    mpq_class base = fm.poly[k] * mpq_class(multinom);
    const DoubleDouble base_dd = detail::to_double_double(base);
    // odometer over 0 <= alpha_l <= 2 c_l
    std::fill(alpha.begin(), alpha.end(), 0);
    while (true) {
      unsigned __int128 prod = 1;
      bool exact = true;
      unsigned sign = 0;
      for (std::size_t l = 0; l < m; ++l) {
        bet[l] = static_cast<std::uint16_t>(2 * c[l] - alpha[l]);
        sign += bet[l];
        std::uint64_t t = binom_row[c[l]][alpha[l]];
        if (exact && prod > (static_cast<unsigned __int128>(1) << 100) / t) exact = false;
        prod *= t;
      }
      DoubleDouble b;
      if (exact) {
        double hi = static_cast<double>(prod);
        double lo = static_cast<double>(static_cast<__int128>(prod) - static_cast<__int128>(hi));
        b = base_dd * DoubleDouble(hi, lo);
      } else {
        mpz_class pz = 1, t;
        for (std::size_t l = 0; l < m; ++l) {
          mpz_bin_uiui(t.get_mpz_t(), 2 * c[l], alpha[l]);
          pz *= t;
        }
        b = detail::to_double_double(base * mpq_class(pz));
      }
      if (sign % 2 != 0) b = -b;
      terms.push_back({static_cast<std::uint32_t>(fm.half.rank(alpha.data())),
                       static_cast<std::uint32_t>(fm.half.rank(bet.data())), b});
      std::size_t l = 0;
      while (l < m && alpha[l] == 2 * c[l]) alpha[l++] = 0;
      if (l == m) break;
      ++alpha[l];
    }
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return a.alpha != b.alpha ? a.alpha < b.alpha : a.beta < b.beta;
  });
  fm.row_start.assign(fm.half.size() + 1, 0);
  fm.beta.reserve(terms.size());
  fm.b.reserve(terms.size());
  for (const Term& t : terms) {
    ++fm.row_start[t.alpha + 1];
    fm.beta.push_back(t.beta);
    fm.b.push_back(t.b);
  }
  for (std::uint64_t r = 0; r < fm.half.size(); ++r) fm.row_start[r + 1] += fm.row_start[r];
  return fm;
}

/// Dense feature matrices with b_a on the X side: Xmat[i, a] = b_a x_i^alpha, Ymat[j, a] = y_j^beta.
/// Row-major n x M in the graded lexicographic column order.
inline std::pair<std::vector<double>, std::vector<double>> build_feature_matrices(
    const KdeInstance& inst, const FeatureMap& fm, std::uint64_t ceiling = kDefaultTermCeiling) {
  inst.validate();
  if (inst.m != fm.m) throw DomainError("build_feature_matrices: dimension mismatch");
  unsigned __int128 cells = static_cast<unsigned __int128>(inst.n) * fm.M;
  if (cells > ceiling) throw CapacityError("feature matrices exceed the cell ceiling", fm.M);
  auto cols = fm.indices(ceiling);
  const std::size_t M = cols.size(), m = fm.m;
  std::vector<double> bcol(M);
  for (std::size_t a = 0; a < M; ++a) bcol[a] = fm.coefficient(cols[a]).get_d();
  std::vector<double> Xm(inst.n * M), Ym(inst.n * M);
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (std::size_t a = 0; a < M; ++a) {
      double px = 1.0, py = 1.0;
      for (std::size_t l = 0; l < m; ++l) {
        for (unsigned e = 0; e < cols[a][l]; ++e) px *= inst.x(i)[l];
        for (unsigned e = 0; e < cols[a][m + l]; ++e) py *= inst.y(i)[l];
      }
      Xm[i * M + a] = bcol[a] * px;
      Ym[i * M + a] = py;
    }
  }
  return {std::move(Xm), std::move(Ym)};
}

enum class KdeScalar { AUTO, DOUBLE, DOUBLE_DOUBLE, HIGH_PRECISION };

inline std::string to_string(KdeScalar s) {
  switch (s) {
    case KdeScalar::AUTO: return "auto";
    case KdeScalar::DOUBLE: return "double";
    case KdeScalar::DOUBLE_DOUBLE: return "double-double";
    case KdeScalar::HIGH_PRECISION: return "high-precision";
  }
  return "auto";
}

inline KdeScalar parse_scalar(const std::string& s) {
  if (s == "auto") return KdeScalar::AUTO;
  if (s == "double") return KdeScalar::DOUBLE;
  if (s == "double-double") return KdeScalar::DOUBLE_DOUBLE;
  if (s == "high-precision") return KdeScalar::HIGH_PRECISION;
  throw ParseError("unknown scalar '" + s + "'");
}

struct KdeOptions {
  std::optional<HPReal> B;  // overrides the instance bound
  unsigned workers = 1;
  KdeScalar scalar = KdeScalar::AUTO;
  std::uint64_t ceiling = kDefaultTermCeiling;
  bool validate_diameter = false;
  long prec_bits = kDefaultPrecision;
};

struct KdeResult {
  std::vector<double> v;
  std::uint64_t M = 0;
  std::uint64_t distinct_monomials = 0;
  std::uint64_t nonzero_coefficients = 0;
  std::uint64_t degree = 0;
  HPReal B_used;
  HPReal B_estimate;
  bool B_estimated = false;
  KdeScalar scalar = KdeScalar::DOUBLE;
  long scalar_bits = 53;
  HPReal poly_error;      // sup |p - e^{-z}| on [0, B_used], certified
  HPReal rounding_error;  // a priori floating-point bound, relative to ||w||_1
  std::optional<double> max_sq_distance;
  std::vector<std::string> warnings;
  double elapsed_build_ms = 0.0;
  double elapsed_matvec_ms = 0.0;
};

namespace detail {

template <class F>
void parallel_ranges(std::size_t count, unsigned workers, F&& f) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    f(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    std::size_t lo = count * t / workers, hi = count * (t + 1) / workers;
    pool.emplace_back([&f, lo, hi] { f(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// Dot2 accumulation: products are error-free, sums carry a running compensation.
struct Dot2 {
  double p = 0.0, s = 0.0;
  void add(double a, double b) {
    double h, r, t, q;
    two_prod(a, b, h, r);
    two_sum(p, h, t, q);
    p = t;
    s += q + r;
  }
  double value() const { return p + s; }
};

struct DoubleArith {
  static constexpr std::size_t kTile = 8;
  using Value = double;
  using Acc = Dot2;
  Value one() const { return 1.0; }
  Value shift(double x, double c) const { return x - c; }
  Value coeff(const DoubleDouble& b) const { return b.hi; }
  Value mul(const Value& a, const Value& b) const { return a * b; }
  Acc zero_acc() const { return {}; }
  void add(Acc& s, const Value& a, const Value& b) const { s.add(a, b); }
  Value finish(const Acc& s) const { return s.value(); }
  double to_double(const Value& v) const { return v; }
};

struct DoubleDoubleArith {
  static constexpr std::size_t kTile = 8;
  using Value = DoubleDouble;
  using Acc = DoubleDouble;
  Value one() const { return 1.0; }
  Value shift(double x, double c) const {
    double s, e;
    two_sum(x, -c, s, e);
    return {s, e};
  }
  Value coeff(const DoubleDouble& b) const { return b; }
  Value mul(const Value& a, const Value& b) const { return a * b; }
  Acc zero_acc() const { return {}; }
  void add(Acc& s, const Value& a, const Value& b) const { s += a * b; }
  Value finish(const Acc& s) const { return s; }
  double to_double(const Value& v) const { return v.to_double(); }
};

struct HighPrecisionArith {
  static constexpr std::size_t kTile = 1;
  long prec;
  using Value = HPReal;
  using Acc = HPReal;
  Value one() const { return HPReal(1, prec); }
  Value shift(double x, double c) const { return HPReal(x, prec) - HPReal(c, prec); }
  Value coeff(const DoubleDouble& b) const { return HPReal(b.hi, prec) + HPReal(b.lo, prec); }
  Value mul(const Value& a, const Value& b) const { return a * b; }
  Acc zero_acc() const { return HPReal(0, prec); }
  void add(Acc& s, const Value& a, const Value& b) const { s += a * b; }
  Value finish(const Acc& s) const { return s; }
  double to_double(const Value& v) const { return v.to_double(); }
};

// Monomials of `count` points at once, interleaved: out[r * T + t] for point t of the tile.
template <class Arith, std::size_t T>
void monomial_tile(const Arith& ar, const MonomialTable& tab, const std::vector<typename Arith::Value>& pts,
                   std::size_t count, std::vector<typename Arith::Value>& out) {
  const std::size_t m = tab.nvars();
  for (std::size_t t = 0; t < T; ++t) out[t] = ar.one();
  for (std::uint64_t r = 1; r < tab.size(); ++r) {
    const std::size_t par = tab.parent(r) * T, var = tab.var(r);
    for (std::size_t t = 0; t < count; ++t) out[r * T + t] = ar.mul(out[par + t], pts[t * m + var]);
  }
}

// v = X (Y^T w) with identical Y columns merged: u[beta] = sum_j w_j y_j^beta,
// s[alpha] = sum_beta b_{alpha beta} u[beta], v_i = sum_alpha x_i^alpha s[alpha].
// Each output entry is owned by one worker and reduced in a fixed order, so the result does
// not depend on the worker count. Points are processed in tiles of T to share memory traffic.
template <class Arith>
std::vector<double> factored_matvec(const Arith& ar, const KdeInstance& inst, const FeatureMap& fm,
                                    const std::vector<double>& center, unsigned workers) {
  using V = typename Arith::Value;
  using Acc = typename Arith::Acc;
  constexpr std::size_t T = Arith::kTile;
  const std::size_t n = inst.n, m = inst.m;
  const std::uint64_t H = fm.half.size();
  auto load = [&](const double* base, std::size_t first, std::size_t count, std::vector<V>& pts) {
    for (std::size_t t = 0; t < count; ++t) {
      for (std::size_t l = 0; l < m; ++l) pts[t * m + l] = ar.shift(base[(first + t) * m + l], center[l]);
    }
  };

  std::vector<V> u(H, ar.one());
  parallel_ranges(H, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<Acc> acc(hi - lo, ar.zero_acc());
    std::vector<V> pts(T * m, ar.one()), mono(H * T, ar.one()), wt(T, ar.one());
    for (std::size_t j0 = 0; j0 < n; j0 += T) {
      const std::size_t cnt = std::min(T, n - j0);
      load(inst.Y.data(), j0, cnt, pts);
      for (std::size_t t = 0; t < cnt; ++t) wt[t] = ar.shift(inst.w[j0 + t], 0.0);
      monomial_tile<Arith, T>(ar, fm.half, pts, cnt, mono);
      for (std::size_t r = lo; r < hi; ++r) {
        for (std::size_t t = 0; t < cnt; ++t) ar.add(acc[r - lo], wt[t], mono[r * T + t]);
      }
    }
    for (std::size_t r = lo; r < hi; ++r) u[r] = ar.finish(acc[r - lo]);
  });

  std::vector<V> s(H, ar.one());
  parallel_ranges(H, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t a = lo; a < hi; ++a) {
      Acc acc = ar.zero_acc();
      for (std::uint64_t t = fm.row_start[a]; t < fm.row_start[a + 1]; ++t) ar.add(acc, ar.coeff(fm.b[t]), u[fm.beta[t]]);
      s[a] = ar.finish(acc);
    }
  });

  std::vector<double> v(n, 0.0);
  const std::size_t tiles = (n + T - 1) / T;
  parallel_ranges(tiles, workers, [&](std::size_t lo, std::size_t hi) {
    std::vector<V> pts(T * m, ar.one()), mono(H * T, ar.one());
    std::vector<Acc> acc(T, ar.zero_acc());
    for (std::size_t tile = lo; tile < hi; ++tile) {
      const std::size_t i0 = tile * T, cnt = std::min(T, n - i0);
      load(inst.X.data(), i0, cnt, pts);
      monomial_tile<Arith, T>(ar, fm.half, pts, cnt, mono);
      std::fill(acc.begin(), acc.end(), ar.zero_acc());
      for (std::uint64_t a = 0; a < H; ++a) {
        for (std::size_t t = 0; t < cnt; ++t) ar.add(acc[t], mono[a * T + t], s[a]);
      }
      for (std::size_t t = 0; t < cnt; ++t) v[i0 + t] = ar.to_double(ar.finish(acc[t]));
    }
  });
  return v;
}

// Coordinate box of all 2n points: per-coordinate midpoint and sum of squared widths.
inline std::pair<std::vector<double>, HPReal> bounding_box(const KdeInstance& inst) {
  std::vector<double> lo(inst.m, INFINITY), hi(inst.m, -INFINITY);
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (std::size_t l = 0; l < inst.m; ++l) {
      lo[l] = std::min({lo[l], inst.x(i)[l], inst.y(i)[l]});
      hi[l] = std::max({hi[l], inst.x(i)[l], inst.y(i)[l]});
    }
  }
  std::vector<double> c(inst.m);
  HPReal sum(0, kDefaultPrecision);
  for (std::size_t l = 0; l < inst.m; ++l) {
    c[l] = lo[l] + (hi[l] - lo[l]) / 2;
    HPReal width = sub(HPReal(hi[l], kDefaultPrecision), HPReal(lo[l], kDefaultPrecision), Round::Up);
    sum = add(sum, sqr(width, Round::Up), Round::Up);
  }
  return {c, sum};
}

}  // namespace detail

/// Upper bound on the squared diameter: sum over coordinates of (max - min)^2 over all 2n points.
inline HPReal estimate_B(const KdeInstance& inst) { return detail::bounding_box(inst).second; }

/// Largest ||x_i - y_j||^2 over all pairs, O(n^2 m).
inline double max_squared_distance(const KdeInstance& inst) {
  double best = 0.0;
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (std::size_t j = 0; j < inst.n; ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < inst.m; ++l) {
        double t = inst.x(i)[l] - inst.y(j)[l];
        s += t * t;
      }
      best = std::max(best, s);
    }
  }
  return best;
}

/// A priori bound on |computed v - exact v| / ||w||_1 for unit roundoff 2^-bits:
/// (8d + 16 + 2(n + H)) u A + shift term, with A = sum_k |p_k| Bhat^k over the centered box.
inline HPReal matvec_error_bound(const FeatureMap& fm, const HPReal& Bhat, std::size_t n, long bits,
                                 bool compensated, bool exact_shift) {
  const long p = kDefaultPrecision;
  HPReal A(0, p), Bk(1, p);
  for (const mpq_class& c : fm.poly) {
    A = add(A, mul(HPReal(mpq_class(abs(c)), p, Round::Up), Bk, Round::Up), Round::Up);
    Bk = mul(Bk, Bhat, Round::Up);
  }
  HPReal u = HPReal::pow2(-bits, p);
  double depth = 8.0 * static_cast<double>(fm.d) + 16.0;
  double sums = 2.0 * static_cast<double>(n + fm.half.size());
  HPReal lin = compensated ? HPReal(depth, p) + sqr(HPReal(sums, p) * u) / u : HPReal(depth + sums, p);
  HPReal err = mul(mul(lin, u, Round::Up), A, Round::Up);
  if (!exact_shift) {
    // Rounded centering moves each z by at most 2u Bhat; |p'| <= 2 d^2 (1 + delta) / B by Markov.
    HPReal dd(static_cast<double>(fm.d * fm.d + 1), p);
    HPReal Bd = max(HPReal(fm.domain_B, p), HPReal(1, p));
    err = add(err, mul(ldexp(u * Bhat * dd, 3), HPReal(1, p) / Bd, Round::Up), Round::Up);
  }
  return err;
}

/// Low-rank evaluation of v = X (Y^T w). The scalar is the cheapest one whose a priori
/// rounding bound fits delta/2; a forced scalar that misses the budget is reported as a warning.
inline KdeResult kde_matvec(const KdeInstance& inst, const FeatureMap& fm, const KdeOptions& opt = {}) {
  inst.validate();
  if (inst.m != fm.m) throw DomainError("kde_matvec: dimension mismatch");
  auto t0 = std::chrono::steady_clock::now();
  KdeResult res;
  res.M = fm.M;
  res.distinct_monomials = fm.half.size();
  res.nonzero_coefficients = fm.nonzero();
  res.degree = fm.d;
  res.B_used = fm.domain_B;
  auto [center, Bhat] = detail::bounding_box(inst);
  res.B_estimate = Bhat;
  HPReal budget = ldexp(HPReal(inst.delta, kDefaultPrecision), -1);

  HPReal e_double = matvec_error_bound(fm, Bhat, inst.n, 53, true, false);
  HPReal e_dd = matvec_error_bound(fm, Bhat, inst.n, 100, false, true);
  KdeScalar sc = opt.scalar;
  if (sc == KdeScalar::AUTO) {
    sc = e_double <= budget ? KdeScalar::DOUBLE : e_dd <= budget ? KdeScalar::DOUBLE_DOUBLE : KdeScalar::HIGH_PRECISION;
  }
  res.scalar = sc;
  switch (sc) {
    case KdeScalar::DOUBLE:
      res.scalar_bits = 53;
      res.rounding_error = e_double;
      res.v = detail::factored_matvec(detail::DoubleArith{}, inst, fm, center, opt.workers);
      break;
    case KdeScalar::DOUBLE_DOUBLE:
      res.scalar_bits = 100;
      res.rounding_error = e_dd;
      res.v = detail::factored_matvec(detail::DoubleDoubleArith{}, inst, fm, center, opt.workers);
      break;
    default: {
      // smallest precision with bound <= delta/2, found from the 100-bit bound
      long bits = 100;
      HPReal e = e_dd;
      while (e > budget) {
        long extra = std::max(8L, static_cast<long>(std::ceil(log(e / budget).to_double() / std::log(2.0))) + 2);
        bits += extra;
        e = matvec_error_bound(fm, Bhat, inst.n, bits, false, true);
      }
      res.scalar_bits = bits + 2;
      res.rounding_error = e;
      res.v = detail::factored_matvec(detail::HighPrecisionArith{bits + 2}, inst, fm, center, opt.workers);
      break;
    }
  }
  if (res.rounding_error > budget) {
    res.warnings.push_back("rounding bound " + res.rounding_error.to_decimal(6) + " exceeds delta/2 for scalar " +
                           to_string(sc));
  }
  res.elapsed_matvec_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

/// Direct O(n^2 m) evaluation of sum_j w_j exp(-||x_i - y_j||^2) with Neumaier summation.
inline std::vector<double> kde_bruteforce(const KdeInstance& inst) {
  std::vector<double> v(inst.n, 0.0);
  for (std::size_t i = 0; i < inst.n; ++i) {
    double s = 0.0, c = 0.0;
    for (std::size_t j = 0; j < inst.n; ++j) {
      double d2 = 0.0;
      for (std::size_t l = 0; l < inst.m; ++l) {
        double t = inst.x(i)[l] - inst.y(j)[l];
        d2 += t * t;
      }
      double term = inst.w[j] * std::exp(-d2);
      double t = s + term;
      c += std::fabs(s) >= std::fabs(term) ? (s - t) + term : (term - t) + s;
      s = t;
    }
    v[i] = s + c;
  }
  return v;
}

struct KdeSolution {
  ExportedPolynomial poly;
  FeatureMap feature_map;
  KdeResult result;
};

/// Full pipeline: B from options, instance or box estimate; polynomial certified at delta/2
/// on [0, B]; feature expansion; low-rank matvec.
inline KdeSolution solve_kde(const KdeInstance& inst, const KdeOptions& opt = {}) {
  inst.validate();
  auto t0 = std::chrono::steady_clock::now();
  const long p = std::max(opt.prec_bits, kDefaultPrecision);
  HPReal Bhat = estimate_B(inst);
  bool estimated = false;
  HPReal B(1, p);
  if (opt.B) {
    B = HPReal(*opt.B, p);
  } else if (inst.B) {
    B = HPReal(*inst.B, p);
  } else {
    B = max(HPReal(Bhat, p, Round::Up), HPReal(1, p));
    estimated = true;
  }
  if (!B.is_finite() || B < 1) throw DomainError("kde: B must be >= 1");
  ProblemSpec spec{B, ldexp(HPReal(inst.delta, p), -1), Target::EXP_NEG};
  DegreeCertificate cert = find_degree(spec, p);
  KdeSolution sol;
  sol.poly = export_polynomial(spec, cert);
  sol.feature_map = expand_kernel_poly(sol.poly, inst.m, opt.ceiling);
  double build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  sol.result = kde_matvec(inst, sol.feature_map, opt);
  sol.result.elapsed_build_ms = build_ms;
  sol.result.B_estimated = estimated;
  sol.result.B_estimate = Bhat;
  sol.result.poly_error = sol.poly.error_bound;
  if (opt.validate_diameter) {
    double d2 = max_squared_distance(inst);
    sol.result.max_sq_distance = d2;
    if (HPReal(d2, p) > B) {
      sol.result.warnings.push_back("squared diameter " + HPReal(d2, p).to_decimal(17) + " exceeds B = " +
                                    B.to_decimal(17) + "; the error contract does not apply");
    }
  } else if (!estimated && Bhat > B) {
    sol.result.warnings.push_back("coordinate box bound " + Bhat.to_decimal(17) + " exceeds B = " + B.to_decimal(17) +
                                  "; run with diameter validation to check the contract");
  }
  return sol;
}

/// Exponent bound for the regime m = alpha ln n, delta = n^-beta, B = kappa ln n.
struct CostModel {
  std::uint64_t n = 0;
  double alpha = 0, beta = 0, kappa = 0;
  HPReal nu;               // nu(kappa / (2 beta))
  HPReal kappa_nu;         // x = kappa nu
  double degree = 0;       // d = nu kappa ln n / 2 (2d = kappa nu ln n)
  double dims = 0;         // alpha ln n
  std::uint64_t d_int = 0;
  std::uint64_t m_int = 0;
  std::string M;           // C(2 d_int + 2 m_int, 2 d_int), exact decimal
  double log_M = 0;
  double exponent_bound = 0;  // ln M / ln n
  double envelope = 0;        // x |ln x|
  double nu_ratio = 0;        // nu kappa ln(1/kappa) / (2 beta)
};

inline CostModel cost_model(std::uint64_t n, double alpha, double beta, double kappa) {
  if (n < 2) throw DomainError("cost_model: n must be >= 2");
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("cost_model: alpha and beta must be positive");
  if (!(kappa > 0) || !(kappa < 0.5)) throw DomainError("cost_model: kappa must lie in (0, 1/2)");
  CostModel c;
  c.n = n;
  c.alpha = alpha;
  c.beta = beta;
  c.kappa = kappa;
  const long p = kDefaultPrecision;
  HPReal r = HPReal(kappa, p) / HPReal(2 * beta, p);
  c.nu = solve_nu(r);
  c.kappa_nu = c.nu * HPReal(kappa, p);
  double ln_n = std::log(static_cast<double>(n));
  c.degree = c.kappa_nu.to_double() * ln_n / 2.0;
  c.dims = alpha * ln_n;
  c.d_int = static_cast<std::uint64_t>(std::max(1.0, std::ceil(c.degree - 1e-12)));
  c.m_int = static_cast<std::uint64_t>(std::max(1.0, std::ceil(c.dims - 1e-12)));
  mpz_class M;
  mpz_bin_uiui(M.get_mpz_t(), 2 * c.d_int + 2 * c.m_int, 2 * c.d_int);
  c.M = M.get_str();
  c.log_M = log(HPReal(M, p, Round::Nearest)).to_double();
  c.exponent_bound = c.log_M / ln_n;
  double x = c.kappa_nu.to_double();
  c.envelope = x * std::fabs(std::log(x));
  c.nu_ratio = (c.kappa_nu * log(HPReal(1, p) / HPReal(kappa, p))).to_double() / (2.0 * beta);
  return c;
}

}  // namespace expdeg
