#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expdeg/chebyshev.hpp"
#include "oracles.hpp"

using namespace expdeg;

TEST(ChebEval, ValueAtOne) { EXPECT_TRUE(cheb_eval(5, HPReal(1, 128)) == ldexp(HPReal(1, 128), -4)); }

TEST(ChebEval, SecondDegree) { EXPECT_NEAR(cheb_eval(2, HPReal(0.5, 128)).to_double(), -0.25, 1e-35); }

TEST(ChebEval, CosineForm) {
  HPReal theta = HPReal::pi(128) / 7;
  HPReal lhs = cheb_eval(3, cos(theta));
  HPReal rhs = ldexp(cos(3 * theta), -2);
  EXPECT_LT(abs(lhs - rhs).to_double(), 1e-35);
}

TEST(ChebEval, DegreeZeroIsOne) { EXPECT_TRUE(cheb_eval(0, HPReal(7.5, 128)) == HPReal(1, 128)); }

TEST(ChebEval, MatchesIndependentClosedForms) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 300; ++t) {
    double x = u(gen);
    unsigned d = static_cast<unsigned>(gen() % 30);
    long double ref = std::ldexp(oracle::chebyshev_t(d, x), d == 0 ? 0 : 1 - static_cast<int>(d));
    if (d == 0) ref = 1.0L;
    double got = cheb_eval(d, HPReal(x, 128)).to_double();
    EXPECT_NEAR(got, static_cast<double>(ref), 1e-14 * std::max(1.0, std::fabs(static_cast<double>(ref)))) << d << " " << x;
  }
}

TEST(ChebEval, BoundedOnTheInterval) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10000; ++t) {
    std::uint64_t d = gen() % 65;
    HPReal x(u(gen), 128);
    HPReal bound = ldexp(HPReal(1, 128) + ldexp(HPReal(1, 128), -40), 1 - static_cast<long>(d));
    if (d == 0) bound = HPReal(1, 128);
    ASSERT_LE(abs(cheb_eval(d, x)), bound) << d;
  }
}

TEST(ChebNodes, DegreeOne) {
  ChebNodes n = cheb_extrema_and_roots(1);
  ASSERT_EQ(n.roots.size(), 1u);
  ASSERT_EQ(n.extrema.size(), 2u);
  EXPECT_TRUE(n.roots[0].is_zero());
  EXPECT_TRUE(n.extrema[0] == HPReal(1, 128));
  EXPECT_TRUE(n.extrema[1] == HPReal(-1, 128));
}

TEST(ChebNodes, DegreeTwo) {
  ChebNodes n = cheb_extrema_and_roots(2);
  HPReal pi = HPReal::pi(128);
  ASSERT_EQ(n.roots.size(), 2u);
  EXPECT_LT(abs(n.roots[0] - cos(pi / 4)).to_double(), 1e-35);
  EXPECT_LT(abs(n.roots[1] - cos(3 * pi / 4)).to_double(), 1e-35);
}

TEST(ChebNodes, RootsAreZerosAndExtremaAreExtreme) {
  for (std::uint64_t d : {7ull, 12ull, 33ull}) {
    ChebNodes n = cheb_extrema_and_roots(d);
    ASSERT_EQ(n.roots.size(), d);
    ASSERT_EQ(n.extrema.size(), d + 1);
    HPReal peak = ldexp(HPReal(1, 128), 1 - static_cast<long>(d));
    for (const HPReal& r : n.roots) EXPECT_LT(abs(cheb_eval(d, r)), ldexp(peak, -100));
    for (std::size_t k = 0; k < n.extrema.size(); ++k) {
      HPReal q = cheb_eval(d, n.extrema[k]);
      EXPECT_LT(abs(abs(q) - peak), ldexp(peak, -100));
      EXPECT_EQ(q.sign(), k % 2 == 0 ? 1 : -1);
    }
    for (std::size_t k = 1; k < n.roots.size(); ++k) EXPECT_GT(n.roots[k - 1], n.roots[k]);
  }
}

TEST(ChebNodes, RejectsDegreeZero) { EXPECT_THROW(cheb_extrema_and_roots(0), DomainError); }

namespace {

double growth_ratio(double eps, std::uint64_t d) {
  HPReal x = HPReal(1, 256) + HPReal(eps, 256);
  HPReal lhs = log(ldexp(cheb_eval(d, x), static_cast<long>(d)));
  return lhs.to_double() / (static_cast<double>(d) * std::sqrt(2 * eps));
}

}  // namespace

TEST(ChebEval, GrowthRatioMatchesHyperbolicForm) {
  for (double eps : {1e-4, 1e-2, 1e-1}) {
    for (std::uint64_t d : {50ull, 200ull}) {
      // 2^d Q_d(x) = 2 cosh(d acosh x)
      long double t = static_cast<long double>(d) * std::acosh(1.0L + eps);
      long double ref = std::log(2.0L * std::cosh(t)) / (static_cast<long double>(d) * std::sqrt(2.0L * eps));
      EXPECT_NEAR(growth_ratio(eps, d), static_cast<double>(ref), 1e-13) << eps << " " << d;
    }
  }
}

TEST(ChebEval, GrowthRatioWindowWhenExponentIsLarge) {
  for (double eps : {1e-4, 1e-2, 1e-1}) {
    for (std::uint64_t d : {50ull, 200ull}) {
      if (static_cast<double>(d) * std::sqrt(2 * eps) < 2.0) continue;
      double r = growth_ratio(eps, d);
      EXPECT_GE(r, 1 - 3 * std::sqrt(eps)) << eps << " " << d;
      EXPECT_LE(r, 1 + 3 * std::sqrt(eps)) << eps << " " << d;
    }
  }
}

TEST(ChebEval, GrowthRatioCarriesAnAdditiveLogTwo) {
  // d sqrt(2 eps) = 0.707: log(2 cosh t) / t = 1.307, outside 1 +- 3 sqrt(eps).
  double r = growth_ratio(1e-4, 50);
  EXPECT_NEAR(r, 1.3074, 1e-3);
  EXPECT_GT(r, 1 + 3 * std::sqrt(1e-4));
}

TEST(ChebEval, ExtremalAmongBoundedPolynomials) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    unsigned d = 1 + static_cast<unsigned>(gen() % 12);
    // p = 2^(1-d) sum_j c_j T_j with sum |c_j| <= 1, so 2^(d-1) p stays in [-1, 1].
    std::vector<double> c(d + 1);
    double s = 0;
    for (double& v : c) {
      v = u(gen);
      s += std::fabs(v);
    }
    for (double& v : c) v /= s;
    for (int probe = 0; probe < 200; ++probe) {
      double xg = -1.0 + 2.0 * probe / 199.0;
      long double pv = 0;
      for (unsigned j = 0; j <= d; ++j) pv += c[j] * oracle::chebyshev_t(j, xg);
      ASSERT_LE(std::fabs(static_cast<double>(pv)), 1.0 + 1e-12);
    }
    for (int probe = 0; probe < 20; ++probe) {
      double mag = 1.0 + 2.0 * (u(gen) + 1.0) / 2.0;
      if (mag <= 1.0) mag = 1.0 + 1e-9;
      double xp = (gen() % 2 ? 1.0 : -1.0) * mag;
      long double pv = 0;
      for (unsigned j = 0; j <= d; ++j) pv += c[j] * oracle::chebyshev_t(j, xp);
      pv = std::ldexp(pv, 1 - static_cast<int>(d));
      double q = std::fabs(cheb_eval(d, HPReal(xp, 128)).to_double());
      EXPECT_GE(q * (1 + 1e-12), std::fabs(static_cast<double>(pv))) << d << " " << xp;
    }
  }
}

TEST(ChebyshevSum, MatchesBasisExpansion) {
  std::vector<HPReal> a = {HPReal(0.5, 128), HPReal(-0.25, 128), HPReal(0.125, 128), HPReal(2.0, 128)};
  for (double x : {-0.9, -0.1, 0.3, 1.0}) {
    HPReal X(x, 128);
    HPReal direct = ldexp(a[0], -1);
    for (std::size_t j = 1; j < a.size(); ++j) direct = direct + ldexp(a[j], static_cast<long>(j) - 1) * cheb_eval(j, X);
    EXPECT_LT(abs(chebyshev_sum(a, X) - direct).to_double(), 1e-33) << x;
  }
}
