#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "expdeg/approx.hpp"
#include "expdeg/chebyshev.hpp"
#include "expdeg/coeffs.hpp"
#include "expdeg/hpreal.hpp"

namespace expdeg {

inline constexpr std::uint64_t kMaxRemezDegree = 40;

struct RemezResult {
  HPReal error;        // midpoint of [level, max error]
  HPReal level;        // |E| of the last reference
  HPReal max_error;    // sup |p - f| of the last iterate
  std::vector<HPReal> cheb;  // c_j of sum_j c_j T_j(x), x in [-1, 1]
  int iterations = 0;
};

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
inline std::vector<HPReal> solve_dense(std::vector<std::vector<HPReal>> A, std::vector<HPReal> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (abs(A[r][col]) > abs(A[piv][col])) piv = r;
    }
    if (A[piv][col].is_zero()) throw ConvergenceError("Remez: singular reference system");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      HPReal f = A[r][col] / A[col][col];
      if (f.is_zero()) continue;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<HPReal> x(n, HPReal(0, b[0].precision()));
  for (std::size_t i = n; i-- > 0;) {
    HPReal s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
    x[i] = s / A[i][i];
  }
  return x;
}

}  // namespace detail

/// Best uniform approximation of degree d to e^{-z} or e^{z} on [0, B] by the Remez exchange.
/// Works in x = 2z/B - 1 with a Chebyshev basis; the reference starts at the d+2 extrema of
/// T_{d+1}. Stops when the equioscillation level and the true maximum agree to 1e-8 relative.
inline RemezResult minimax_remez(std::uint64_t d, const ProblemSpec& spec, long prec_bits = 256) {
  spec.validate();
  if (d > kMaxRemezDegree) throw DomainError("minimax_oracle: degree above 40");
  // The error is about |a_{d+1}|; resolve it with 80 spare bits beyond its magnitude.
  long p = prec_bits;
  {
    CoeffValue a = spec.target == Target::EXP_NEG ? compute_A(d + 1, spec.lambda(), 64)
                                                 : compute_B(d + 1, spec.lambda(), 64);
    long need = 80 - abs(a.value).exponent();
    if (spec.target == Target::EXP_POS) need += static_cast<long>(std::ceil(spec.B.to_double() * 1.4426950408889634));
    p = std::max(p, need);
  }
  const std::size_t n = d + 2;
  HPReal lam(spec.lambda(), p);
  auto f = [&](const HPReal& x) {
    HPReal z = lam * (x + 1);
    return spec.target == Target::EXP_NEG ? exp(-z) : exp(z);
  };
  auto poly = [&](const std::vector<HPReal>& c, const HPReal& x) {
    // chebyshev_sum halves c[0]; pre-double it.
    std::vector<HPReal> a = c;
    a[0] = ldexp(a[0], 1);
    return chebyshev_sum(a, x);
  };

  std::vector<HPReal> ref;
  {
    HPReal pi = HPReal::pi(p);
    for (std::size_t i = 0; i < n; ++i) {
      ref.push_back(-cos(pi * HPReal(i, p) / HPReal(d + 1, p)));
    }
    ref.front() = HPReal(-1, p);
    ref.back() = HPReal(1, p);
  }

  RemezResult res;
  const HPReal tol(1e-8, p);
  const HPReal xtol = HPReal::pow2(-std::min<long>(p / 2, 60), p);
  for (int it = 1; it <= 200; ++it) {
    std::vector<std::vector<HPReal>> A(n, std::vector<HPReal>(n, HPReal(0, p)));
    std::vector<HPReal> rhs(n, HPReal(0, p));
    for (std::size_t i = 0; i < n; ++i) {
      HPReal t0(1, p), t1 = ref[i];
      for (std::size_t j = 0; j <= d; ++j) {
        A[i][j] = j == 0 ? t0 : t1;
        if (j >= 1) {
          HPReal t2 = ldexp(ref[i], 1) * t1 - t0;
          t0 = std::move(t1);
          t1 = std::move(t2);
        }
      }
      A[i][d + 1] = HPReal(i % 2 == 0 ? 1 : -1, p);
      rhs[i] = f(ref[i]);
    }
    std::vector<HPReal> sol = detail::solve_dense(A, rhs);
    std::vector<HPReal> c(sol.begin(), sol.begin() + static_cast<long>(d + 1));
    HPReal E = sol[d + 1];
    auto err = [&](const HPReal& x) { return poly(c, x) - f(x); };

    // Roots of the error between consecutive reference points.
    std::vector<HPReal> bounds;
    bounds.emplace_back(-1, p);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      HPReal a = ref[i], b = ref[i + 1];
      HPReal ea = err(a);
      for (int k = 0; k < 200 && b - a > xtol; ++k) {
        HPReal m = ldexp(a + b, -1);
        HPReal em = err(m);
        if ((em.sign() >= 0) == (ea.sign() >= 0)) {
          a = m;
          ea = em;
        } else {
          b = m;
        }
      }
      bounds.push_back(ldexp(a + b, -1));
    }
    bounds.emplace_back(1, p);

    // Extremum of |error| in each root interval by golden section, endpoints included.
    const HPReal g = (sqrt(HPReal(5, p)) - 1) / 2;
    std::vector<HPReal> next;
    HPReal max_err(0, p);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      HPReal a = bounds[i], b = bounds[i + 1];
      HPReal x1 = b - g * (b - a), x2 = a + g * (b - a);
      HPReal f1 = abs(err(x1)), f2 = abs(err(x2));
      for (int k = 0; k < 300 && b - a > xtol; ++k) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + g * (b - a);
          f2 = abs(err(x2));
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - g * (b - a);
          f1 = abs(err(x1));
        }
      }
      HPReal best = ldexp(a + b, -1);
      HPReal fb = abs(err(best));
      for (const HPReal& cand : {bounds[i], bounds[i + 1]}) {
        if ((i == 0 && cand == bounds[0]) || (i + 2 == bounds.size() && cand == bounds.back())) {
          HPReal fc = abs(err(cand));
          if (fc > fb) {
            fb = fc;
            best = cand;
          }
        }
      }
      next.push_back(best);
      if (fb > max_err) max_err = fb;
    }
    HPReal level = abs(E);
    res.level = level;
    res.max_error = max_err;
    res.cheb = c;
    res.iterations = it;
    res.error = ldexp(level + max_err, -1);
    if (max_err - level <= tol * max_err) return res;
    ref = std::move(next);
  }
  throw ConvergenceError("minimax_oracle: Remez did not converge in 200 iterations");
}

inline HPReal minimax_oracle(std::uint64_t d, const ProblemSpec& spec) { return minimax_remez(d, spec).error; }

}  // namespace expdeg
