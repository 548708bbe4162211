#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expdeg/chebyshev.hpp"
#include "expdeg/coeffs.hpp"
#include "expdeg/core_math.hpp"
#include "oracles.hpp"

using namespace expdeg;

namespace {

HPReal exact_bessel(unsigned v, const mpq_class& x, long prec = 256) {
  return HPReal(oracle::bessel_i_series(v, x), prec);
}

bool contains(const CoeffValue& c, const HPReal& x) {
  return abs(x - HPReal(c.value, x.precision())) <= HPReal(c.error_radius, x.precision());
}

}  // namespace

TEST(ComputeE, FirstOrderAtSmallestLambda) {
  CoeffValue e = compute_E(1, HPReal(0.5, 128));
  EXPECT_GE(e.value, 0.25);
  EXPECT_LE(e.value, 0.27);
}

TEST(ComputeE, SecondOrderAtOneMatchesExactSeries) {
  CoeffValue e = compute_E(2, HPReal(1, 128));
  HPReal ref = exact_bessel(2, 1);
  EXPECT_LT(abs(HPReal(e.value, 256) - ref).to_double(), 1e-25);
}

TEST(ComputeE, ZeroOrderAtOneMatchesExactSeries) {
  CoeffValue e = compute_E(0, HPReal(1, 128));
  EXPECT_LT(abs(HPReal(e.value, 256) - exact_bessel(0, 1)).to_double(), 1e-25);
}

TEST(ComputeE, RejectsSmallLambda) { EXPECT_THROW(compute_E(0, HPReal(0.25, 128)), DomainError); }

TEST(ComputeE, AgreesWithBackwardRecurrence) {
  for (double lam : {0.5, 1.0, 5.0, 20.0, 40.0}) {
    for (int v = 0; v <= 50; ++v) {
      long double ref = oracle::bessel_i_miller(v, static_cast<long double>(lam));
      double got = compute_E(static_cast<std::uint64_t>(v), HPReal(lam, 128)).value.to_double();
      EXPECT_LT(std::fabs(static_cast<double>((got - ref) / ref)), 1e-12) << v << " " << lam;
    }
  }
}

TEST(ComputeE, ExactSeriesAgreementAtRationalArguments) {
  for (const mpq_class& x : {mpq_class(1, 2), mpq_class(3), mpq_class(17, 4)}) {
    for (unsigned v : {0u, 1u, 7u, 30u}) {
      HPReal ref = exact_bessel(v, x);
      CoeffValue e = compute_E(v, HPReal(x, 128));
      EXPECT_LE(abs(HPReal(e.value, 256) - ref), ldexp(ref, -120)) << v << " " << x.get_str();
    }
  }
}

TEST(ComputeA, SignAlternates) {
  EXPECT_LT(compute_A(3, HPReal(2.0, 128)).value, 0);
  EXPECT_GT(compute_A(4, HPReal(2.0, 128)).value, 0);
}

TEST(ComputeA, MagnitudeIsScaledE) {
  HPReal lam(3.0, 128);
  CoeffValue a = compute_A(5, lam), e = compute_E(5, lam);
  HPReal expect = 2 * exp(-lam) * e.value;
  EXPECT_LE(abs(abs(a.value) - expect), ldexp(expect, -118));
}

TEST(ComputeB, RelatedToAByExponential) {
  HPReal lam(2.5, 128);
  CoeffValue a = compute_A(4, lam), b = compute_B(4, lam);
  HPReal expect = exp(2 * lam) * abs(a.value);
  EXPECT_LE(abs(b.value - expect), ldexp(expect, -118));
}

TEST(ComputeB, PositiveEverywhere) {
  for (double lam : {0.5, 3.0, 50.0})
    for (std::uint64_t v : {0ull, 3ull, 40ull, 200ull}) EXPECT_GT(compute_B(v, HPReal(lam, 128)).value, 0);
}

TEST(ComputeB, ThirdOrderAtOne) {
  CoeffValue b = compute_B(3, HPReal(1, 128));
  HPReal ref = 2 * exp(HPReal(1, 256)) * exact_bessel(3, 1);
  EXPECT_LT(abs(HPReal(b.value, 256) - ref).to_double(), 1e-25);
}

TEST(CoeffValue, RadiusMeetsTargetPrecision) {
  for (long p : {64L, 128L, 300L}) {
    for (double lam : {0.5, 8.0, 200.0}) {
      for (std::uint64_t v : {0ull, 5ull, 100ull, 1000ull}) {
        CoeffValue c = compute_A(v, HPReal(lam, p), p);
        HPReal scale = max(abs(c.value), ldexp(HPReal(1, p), -p));
        EXPECT_LE(c.error_radius, ldexp(scale, -p)) << p << " " << v << " " << lam;
      }
    }
  }
}

TEST(CoeffValue, RadiusIsSoundAgainstHigherPrecision) {
  for (double lam : {0.5, 2.0, 40.0, 700.0}) {
    for (std::uint64_t v : {0ull, 1ull, 9ull, 80ull, 600ull}) {
      CoeffValue c = compute_E(v, HPReal(lam, 128), 128);
      CoeffValue ref = compute_E(v, HPReal(lam, 192), 192);
      EXPECT_TRUE(contains(c, HPReal(ref.value, 256))) << v << " " << lam;
      CoeffValue a = compute_A(v, HPReal(lam, 128), 128);
      CoeffValue aref = compute_A(v, HPReal(lam, 192), 192);
      EXPECT_TRUE(contains(a, HPReal(aref.value, 256))) << v << " " << lam;
    }
  }
}

TEST(CoeffValue, DecayEnvelope) {
  // log|A| - (Psi - lambda) = log 2 + log E - Psi, bounded by log(C (v + lambda)).
  const double logC = 2.0;
  for (double lam : {0.5, 2.0, 10.0, 50.0}) {
    for (std::uint64_t v : {0ull, 1ull, 4ull, 20ull, 100ull, 400ull}) {
      HPReal L(lam, 128);
      double gap = (log(abs(compute_A(v, L).value)) - (eval_Psi(v, L) - L)).to_double();
      double env = logC + std::log(static_cast<double>(v) + lam);
      EXPECT_LE(std::fabs(gap), env) << v << " " << lam;
    }
  }
}

TEST(CoeffValue, SandwichAroundRateFunction) {
  for (double lam : {0.5, 1.0, 4.0, 16.0, 64.0, 256.0}) {
    for (std::uint64_t v : {0ull, 1ull, 3ull, 10ull, 30ull, 100ull, 300ull, 1000ull}) {
      HPReal L(lam, 128);
      double gap = (log(compute_E(v, L).value) - eval_Psi(v, L)).to_double();
      EXPECT_LE(std::fabs(gap), 2.0 * std::log(static_cast<double>(v) + lam) + 2.0) << v << " " << lam;
      if (static_cast<double>(v) <= lam) {
        EXPECT_LE(gap, -0.5 * std::log(lam) + 1.0) << v << " " << lam;
      }
    }
  }
}

TEST(TailBounds, UpperIsMonotoneInD) {
  CoefficientTable table(HPReal(2, 128), Target::EXP_NEG);
  HPReal prev = tail_bounds(table, 1).upper;
  for (std::uint64_t D = 2; D <= 40; ++D) {
    HPReal cur = tail_bounds(table, D).upper;
    EXPECT_LE(cur, prev) << D;
    prev = cur;
  }
}

TEST(TailBounds, LowerNeverExceedsUpper) {
  for (Target t : {Target::EXP_NEG, Target::EXP_POS}) {
    for (double lam : {0.5, 2.0, 8.0, 100.0}) {
      CoefficientTable table(HPReal(lam, 128), t);
      for (std::uint64_t D : {1ull, 2ull, 5ull, 20ull, 60ull, 300ull}) {
        TailBounds tb = tail_bounds(table, D);
        EXPECT_GE(tb.lower, 0);
        EXPECT_LE(tb.lower, tb.upper) << D << " " << lam;
      }
    }
  }
}

TEST(TailBounds, SmallLambdaDecaysFast) {
  TailBounds tb = tail_bounds(20, HPReal(0.5, 128), Target::EXP_NEG);
  EXPECT_LT(tb.upper, 1e-20);
  // The leading omitted term 2 e^-0.5 I_20(0.5) is about 4.5e-31; later terms shrink by
  // I_{v+1}/I_v < 0.25/21, so the whole tail is below lead / (1 - 0.25/21).
  HPReal lead = 2 * exp(HPReal(-0.5, 256)) * exact_bessel(20, mpq_class(1, 2));
  EXPECT_GE(tb.upper, lead);
  EXPECT_LE(tb.upper, lead / (1 - 0.25 / 21) * (1 + 1e-6));
}

TEST(TailBounds, UpperBoundsTheExplicitTail) {
  for (double lam : {0.5, 3.0, 12.0}) {
    CoefficientTable table(HPReal(lam, 128), Target::EXP_NEG);
    const std::uint64_t D = 5;
    HPReal s(0, 256);
    for (std::uint64_t v = D; v < D + 400; ++v) s = s + abs(HPReal(table.coeff(v).value, 256));
    EXPECT_GE(HPReal(tail_bounds(table, D).upper, 256), s) << lam;
  }
}

TEST(CoefficientTable, IndependentOfRequestOrder) {
  CoefficientTable fwd(HPReal(30, 128), Target::EXP_POS), rev(HPReal(30, 128), Target::EXP_POS);
  std::vector<CoeffValue> a, b(600);
  for (std::uint64_t v = 0; v < 600; ++v) a.push_back(fwd.coeff(v));
  for (std::uint64_t v = 600; v-- > 0;) b[v] = rev.coeff(v);
  for (std::uint64_t v = 0; v < 600; ++v) {
    EXPECT_TRUE(identical(a[v].value, b[v].value)) << v;
    EXPECT_TRUE(identical(a[v].error_radius, b[v].error_radius)) << v;
  }
}

TEST(CoefficientTable, MatchesDirectComputation) {
  CoefficientTable table(HPReal(9, 128), Target::EXP_NEG);
  for (std::uint64_t v : {0ull, 1ull, 17ull, 255ull, 256ull, 700ull}) {
    CoeffValue direct = compute_A(v, HPReal(9, 128));
    const CoeffValue& t = table.coeff(v);
    EXPECT_LE(abs(direct.value - t.value), direct.error_radius + t.error_radius) << v;
  }
}

TEST(CoefficientTable, RejectsSmallLambda) {
  EXPECT_THROW(CoefficientTable(HPReal(0.4, 128), Target::EXP_NEG), DomainError);
}

namespace {

// |sum_{v<V} 2^(v-1) a_v Q_v(x) - f(x)| against tail + radii.
void check_reconstruction(Target target, double lam, std::uint64_t V, std::uint64_t seed) {
  const long p = 160;
  CoefficientTable table(HPReal(lam, p), target, p);
  std::vector<HPReal> a;
  HPReal radii(0, p);
  for (std::uint64_t v = 0; v < V; ++v) {
    a.push_back(table.coeff(v).value);
    radii = add(radii, table.coeff(v).error_radius, Round::Up);
  }
  HPReal budget = tail_bounds(table, V).upper + radii;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  HPReal L(lam, p);
  for (int t = 0; t < 100; ++t) {
    HPReal x(u(gen), p);
    HPReal sum = ldexp(a[0], -1);
    for (std::uint64_t v = 1; v < V; ++v) sum = sum + ldexp(a[v] * cheb_eval(v, x), static_cast<long>(v) - 1);
    HPReal f = target == Target::EXP_NEG ? exp(-L * x - L) : exp(L * x + L);
    HPReal slack = ldexp(max(HPReal(1, p), abs(f)), -(p - 24));
    EXPECT_LE(abs(sum - f), budget + slack) << lam << " " << x.to_double();
  }
}

}  // namespace

TEST(Expansion, ReconstructsNegativeExponential) {
  for (double lam : {0.5, 2.0, 8.0}) check_reconstruction(Target::EXP_NEG, lam, 60, 17);
}

TEST(Expansion, ReconstructsPositiveExponential) {
  for (double lam : {0.5, 2.0, 8.0}) check_reconstruction(Target::EXP_POS, lam, 60, 19);
}

TEST(Expansion, ShortSeriesResidualWithinTail) {
  for (double lam : {2.0, 8.0}) check_reconstruction(Target::EXP_NEG, lam, 6, 23);
}
