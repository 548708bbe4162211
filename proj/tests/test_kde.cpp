#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "expdeg/kde.hpp"
#include "expdeg/kde_io.hpp"
#include "oracles.hpp"

using namespace expdeg;

namespace {

ExportedPolynomial monomial_poly(std::vector<mpq_class> c, double B = 1.0) {
  ExportedPolynomial p;
  p.degree = c.size() - 1;
  p.domain_B = HPReal(B, 128);
  p.monomial_form = std::move(c);
  return p;
}

ExportedPolynomial exported(double B, double delta) {
  ProblemSpec spec{HPReal(B, 128), HPReal(delta, 128), Target::EXP_NEG};
  return export_polynomial(spec, find_degree(spec));
}

double w1(const KdeInstance& inst) {
  double s = 0;
  for (double w : inst.w) s += std::fabs(w);
  return s;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double g = 0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::fabs(a[i] - b[i]));
  return g;
}

// The same sum at 256 bits.
std::vector<HPReal> kde_exact(const KdeInstance& inst) {
  std::vector<HPReal> v;
  for (std::size_t i = 0; i < inst.n; ++i) {
    HPReal s(0, 256);
    for (std::size_t j = 0; j < inst.n; ++j) {
      HPReal d2(0, 256);
      for (std::size_t l = 0; l < inst.m; ++l) {
        HPReal t = HPReal(inst.x(i)[l], 256) - HPReal(inst.y(j)[l], 256);
        d2 = d2 + t * t;
      }
      s = s + HPReal(inst.w[j], 256) * exp(-d2);
    }
    v.push_back(s);
  }
  return v;
}

KdeInstance tiny_instance(std::vector<double> X, std::vector<double> Y, std::vector<double> w, double delta,
                          std::size_t m = 1) {
  KdeInstance inst;
  inst.n = w.size();
  inst.m = m;
  inst.X = std::move(X);
  inst.Y = std::move(Y);
  inst.w = std::move(w);
  inst.delta = HPReal(delta, 128);
  return inst;
}

}  // namespace

TEST(ExpandKernel, LinearPolynomialOneDimension) {
  FeatureMap fm = expand_kernel_poly(monomial_poly({0, 1}), 1);
  EXPECT_EQ(fm.M, 6u);
  auto idx = fm.indices();
  int nonzero = 0;
  for (const auto& a : idx) {
    mpq_class b = fm.coefficient(a);
    if (b == 0) continue;
    ++nonzero;
    if (a == std::vector<std::uint16_t>{2, 0}) EXPECT_EQ(b, 1);
    else if (a == std::vector<std::uint16_t>{1, 1}) EXPECT_EQ(b, -2);
    else if (a == std::vector<std::uint16_t>{0, 2}) EXPECT_EQ(b, 1);
    else ADD_FAILURE() << "unexpected term";
  }
  EXPECT_EQ(nonzero, 3);
  EXPECT_EQ(fm.nonzero(), 3u);
}

TEST(ExpandKernel, ConstantPolynomial) {
  FeatureMap fm = expand_kernel_poly(monomial_poly({1}), 3);
  EXPECT_EQ(fm.M, 1u);
  ASSERT_EQ(fm.nonzero(), 1u);
  EXPECT_EQ(fm.b[0].hi, 1.0);
  EXPECT_EQ(fm.coefficient(std::vector<std::uint16_t>(6, 0)), 1);
}

TEST(ExpandKernel, SquareInTwoDimensionsMatchesBruteForce) {
  std::vector<mpq_class> p = {0, 0, 1};
  FeatureMap fm = expand_kernel_poly(monomial_poly(p), 2);
  oracle::Poly ref = oracle::kernel_expansion(p, 2);
  std::size_t nonzero = 0;
  for (const auto& a : fm.indices()) {
    mpq_class b = fm.coefficient(a);
    auto it = ref.find(a);
    EXPECT_EQ(b, it == ref.end() ? mpq_class(0) : it->second);
    nonzero += b != 0;
  }
  EXPECT_EQ(nonzero, ref.size());
  EXPECT_EQ(fm.nonzero(), ref.size());
}

TEST(ExpandKernel, ExportedPolynomialMatchesBruteForce) {
  ExportedPolynomial poly = exported(4, 1e-3);
  for (std::size_t m : {1u, 2u}) {
    FeatureMap fm = expand_kernel_poly(poly, m);
    oracle::Poly ref = oracle::kernel_expansion(poly.monomial_form, m);
    EXPECT_EQ(fm.nonzero(), ref.size());
    // Stored double-double values are the exact coefficients to 2^-100 relative.
    for (std::uint64_t r = 0; r < fm.half.size(); ++r) {
      for (std::uint64_t k = fm.row_start[r]; k < fm.row_start[r + 1]; ++k) {
        std::vector<std::uint16_t> a(2 * m);
        std::copy(fm.half.exponents(r), fm.half.exponents(r) + m, a.begin());
        std::copy(fm.half.exponents(fm.beta[k]), fm.half.exponents(fm.beta[k]) + m, a.begin() + m);
        const mpq_class& exact = ref.at(a);
        mpq_class stored = mpq_class(fm.b[k].hi) + mpq_class(fm.b[k].lo);
        EXPECT_LE(std::fabs(mpq_class((stored - exact) / exact).get_d()), 1e-29);
      }
    }
  }
}

TEST(ExpandKernel, CapacityErrorReportsColumnCount) {
  ExportedPolynomial poly = exported(9, 1e-6);
  try {
    expand_kernel_poly(poly, 50);
    FAIL() << "expected capacity error";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("M = "), std::string::npos);
  }
}

TEST(ExpandKernel, ColumnCountIsExact) {
  ExportedPolynomial poly = exported(4, 1e-3);
  for (std::size_t m : {1u, 2u, 3u}) {
    FeatureMap fm = expand_kernel_poly(poly, m);
    EXPECT_EQ(fm.M, binomial(2 * m + 2 * fm.d, 2 * fm.d));
    EXPECT_EQ(fm.indices().size(), fm.M);
    EXPECT_EQ(column_count_string(m, fm.d), std::to_string(fm.M));
  }
}

TEST(FeatureMatrices, HandExample) {
  FeatureMap fm = expand_kernel_poly(monomial_poly({0, 1}), 1);
  KdeInstance inst = tiny_instance({2}, {3}, {1}, 0.5);
  auto [X, Y] = build_feature_matrices(inst, fm);
  ASSERT_EQ(X.size(), fm.M);
  double dot = 0;
  for (std::size_t a = 0; a < fm.M; ++a) dot += X[a] * Y[a];
  EXPECT_EQ(dot, 1.0);
}

TEST(FeatureMatrices, ProductReproducesKernelPolynomial) {
  ExportedPolynomial poly = exported(4, 1e-3);
  KdeInstance inst = random_instance(5, 2, 4, HPReal(1e-3, 128), 8);
  FeatureMap fm = expand_kernel_poly(poly, 2);
  auto [X, Y] = build_feature_matrices(inst, fm);
  const std::size_t M = fm.M;
  ASSERT_EQ(X.size(), 5 * M);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      long double dot = 0;
      for (std::size_t a = 0; a < M; ++a) dot += static_cast<long double>(X[i * M + a]) * Y[j * M + a];
      long double d2 = 0;
      for (std::size_t l = 0; l < 2; ++l) {
        long double t = static_cast<long double>(inst.x(i)[l]) - inst.y(j)[l];
        d2 += t * t;
      }
      long double ref = oracle::eval_power_sum(poly.monomial_form, d2);
      EXPECT_LE(std::fabs(static_cast<double>(dot - ref)), 1e-10 * std::fabs(static_cast<double>(ref)) + 1e-12);
    }
  }
}

TEST(FeatureMatrices, ZeroPointsGiveConstantTerm) {
  ExportedPolynomial poly = exported(4, 1e-3);
  FeatureMap fm = expand_kernel_poly(poly, 2);
  KdeInstance inst = tiny_instance({0, 0}, {0, 0}, {1}, 1e-3, 2);
  auto [X, Y] = build_feature_matrices(inst, fm);
  double dot = 0;
  for (std::size_t a = 0; a < fm.M; ++a) dot += X[a] * Y[a];
  EXPECT_EQ(dot, poly.monomial_form[0].get_d());
}

TEST(FeatureMap, ReconstructionOnRandomPairs) {
  ExportedPolynomial poly = exported(4, 1e-3);
  FeatureMap fm = expand_kernel_poly(poly, 2);
  auto idx = fm.indices();
  std::vector<long double> b(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) b[a] = fm.coefficient(idx[a]).get_d();
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, std::sqrt(2.0));
  for (int t = 0; t < 100; ++t) {
    long double v[4] = {u(gen), u(gen), u(gen), u(gen)};
    long double sum = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      long double term = b[a];
      for (std::size_t k = 0; k < 4; ++k)
        for (unsigned e = 0; e < idx[a][k]; ++e) term *= v[k];
      sum += term;
    }
    long double d2 = (v[0] - v[2]) * (v[0] - v[2]) + (v[1] - v[3]) * (v[1] - v[3]);
    long double ref = oracle::eval_power_sum(poly.monomial_form, d2);
    EXPECT_LE(std::fabs(static_cast<double>(sum - ref)), 1e-10 * (1 + std::fabs(static_cast<double>(ref))));
  }
}

TEST(KdeMatvec, CoincidentPointsGiveOne) {
  KdeInstance inst = tiny_instance({0.3}, {0.3}, {1}, 1e-6);
  KdeSolution s = solve_kde(inst);
  ASSERT_EQ(s.result.v.size(), 1u);
  EXPECT_LE(std::fabs(s.result.v[0] - 1.0), 1e-6);
}

TEST(KdeMatvec, ZeroWeightsGiveExactZero) {
  KdeInstance inst = random_instance(40, 3, 9, HPReal(1e-3, 128), 2);
  std::fill(inst.w.begin(), inst.w.end(), 0.0);
  KdeSolution s = solve_kde(inst);
  for (double v : s.result.v) EXPECT_EQ(v, 0.0);
}

TEST(KdeMatvec, RandomInstanceWithinContract) {
  KdeInstance inst = random_instance(64, 4, 9, HPReal(1e-6, 128), 3);
  KdeSolution s = solve_kde(inst);
  EXPECT_LE(max_gap(s.result.v, kde_bruteforce(inst)), 1e-6 * w1(inst));
  EXPECT_EQ(s.result.M, binomial(8 + 2 * s.result.degree, 2 * s.result.degree));
  EXPECT_TRUE(s.result.warnings.empty());
}

TEST(KdeMatvec, AgreesWithBruteForceOnRandomInstances) {
  std::mt19937_64 gen(77);
  const double Bs[] = {4, 9, 25};
  const double ds[] = {1e-3, 1e-6};
  for (int t = 0; t < 20; ++t) {
    double B = Bs[gen() % 3], delta = ds[gen() % 2];
    std::size_t m = 1 + gen() % 3, n = 8 + gen() % 60;
    KdeInstance inst = random_instance(n, m, B, HPReal(delta, 128), gen());
    KdeSolution s = solve_kde(inst);
    EXPECT_LE(max_gap(s.result.v, kde_bruteforce(inst)), delta * w1(inst)) << B << " " << delta << " " << m;
  }
}

TEST(KdeMatvec, ForcedScalarsMeetTheContract) {
  KdeInstance inst = random_instance(32, 2, 4, HPReal(1e-3, 128), 12);
  std::vector<double> bf = kde_bruteforce(inst);
  for (KdeScalar sc : {KdeScalar::DOUBLE, KdeScalar::DOUBLE_DOUBLE, KdeScalar::HIGH_PRECISION}) {
    KdeOptions opt;
    opt.scalar = sc;
    KdeSolution s = solve_kde(inst, opt);
    EXPECT_EQ(s.result.scalar, sc);
    EXPECT_LE(max_gap(s.result.v, bf), 1e-3 * w1(inst)) << to_string(sc);
  }
}

TEST(KdeMatvec, TinyToleranceUsesHighPrecision) {
  KdeInstance inst = random_instance(8, 1, 4, HPReal::parse("1e-30", 128), 6);
  KdeSolution s = solve_kde(inst);
  EXPECT_EQ(s.result.scalar, KdeScalar::HIGH_PRECISION);
  std::vector<HPReal> ref = kde_exact(inst);
  for (std::size_t i = 0; i < inst.n; ++i) {
    // The output vector is rounded to double once at the end.
    HPReal err = abs(HPReal(s.result.v[i], 256) - ref[i]);
    EXPECT_LE(err.to_double(), 1e-30 * w1(inst) + std::ldexp(std::fabs(s.result.v[i]), -52));
  }
}

TEST(KdeMatvec, DeterministicAcrossWorkerCounts) {
  KdeInstance inst = random_instance(100, 3, 9, HPReal(1e-3, 128), 5);
  ExportedPolynomial poly = exported(9, 5e-4);
  FeatureMap fm = expand_kernel_poly(poly, 3);
  KdeOptions one, three;
  three.workers = 3;
  KdeResult a = kde_matvec(inst, fm, one), b = kde_matvec(inst, fm, one), c = kde_matvec(inst, fm, three);
  for (std::size_t i = 0; i < inst.n; ++i) {
    EXPECT_EQ(a.v[i], b.v[i]);
    EXPECT_LE(std::fabs(a.v[i] - c.v[i]), 8 * std::ldexp(std::fabs(a.v[i]), -52));
    EXPECT_EQ(a.v[i], c.v[i]);
  }
}

TEST(KdeMatvec, DimensionMismatchIsRejected) {
  FeatureMap fm = expand_kernel_poly(exported(4, 1e-3), 2);
  KdeInstance inst = random_instance(4, 3, 4, HPReal(1e-3, 128), 1);
  EXPECT_THROW(kde_matvec(inst, fm), DomainError);
}

TEST(KdeBruteforce, HandInstances) {
  EXPECT_EQ(kde_bruteforce(tiny_instance({1.5}, {1.5}, {1}, 0.5))[0], 1.0);
  std::vector<double> v = kde_bruteforce(tiny_instance({0, 0}, {0, 1}, {1, 1}, 0.5));
  EXPECT_DOUBLE_EQ(v[0], 1 + std::exp(-1.0));
  EXPECT_DOUBLE_EQ(v[1], 1 + std::exp(-1.0));
}

TEST(KdeBruteforce, MatchesLongDoubleOracle) {
  KdeInstance inst = random_instance(30, 3, 9, HPReal(1e-3, 128), 21);
  std::vector<double> v = kde_bruteforce(inst);
  std::vector<long double> ref = oracle::kde_direct(inst.n, inst.m, inst.X, inst.Y, inst.w);
  for (std::size_t i = 0; i < inst.n; ++i) EXPECT_NEAR(v[i], static_cast<double>(ref[i]), 1e-14);
}

TEST(SolveKde, EstimatesLengthWhenAbsent) {
  KdeInstance inst = random_instance(16, 2, 4, HPReal(1e-3, 128), 9);
  inst.B.reset();
  KdeSolution s = solve_kde(inst);
  EXPECT_TRUE(s.result.B_estimated);
  HPReal bhat = estimate_B(inst);
  EXPECT_TRUE(s.result.B_used == max(HPReal(bhat, s.result.B_used.precision()), HPReal(1, s.result.B_used.precision())));
  EXPECT_GE(bhat.to_double(), max_squared_distance(inst));
  EXPECT_LE(max_gap(s.result.v, kde_bruteforce(inst)), 1e-3 * w1(inst));
}

TEST(SolveKde, WarnsWhenBoxExceedsLength) {
  KdeInstance inst = tiny_instance({0, 3}, {0, 3}, {1, 1}, 1e-3);
  inst.B = HPReal(4, 128);
  KdeSolution s = solve_kde(inst);
  EXPECT_FALSE(s.result.warnings.empty());
  KdeOptions opt;
  opt.validate_diameter = true;
  KdeSolution v = solve_kde(inst, opt);
  ASSERT_TRUE(v.result.max_sq_distance.has_value());
  EXPECT_EQ(*v.result.max_sq_distance, 9.0);
  EXPECT_FALSE(v.result.warnings.empty());
}

TEST(SolveKde, CapacityForHighDimension) {
  KdeInstance inst = random_instance(4, 50, 9, HPReal(1e-9, 128), 1);
  EXPECT_THROW(solve_kde(inst), CapacityError);
}

TEST(SolveKde, RejectsInvalidInstances) {
  KdeInstance inst = tiny_instance({0}, {0}, {1}, 1e-3);
  inst.delta = HPReal(1.5, 128);
  EXPECT_THROW(solve_kde(inst), DomainError);
  KdeInstance nan = tiny_instance({std::nan("")}, {0}, {1}, 1e-3);
  EXPECT_THROW(solve_kde(nan), DomainError);
}

TEST(CostModel, ExponentDecreasesWithKappa) {
  const std::uint64_t n = 1ull << 32;
  double prev = 1e9;
  std::vector<double> c;
  for (double kappa : {1e-2, 1e-4, 1e-6}) {
    CostModel cm = cost_model(n, 1, 1, kappa);
    EXPECT_LT(cm.exponent_bound, prev) << kappa;
    prev = cm.exponent_bound;
    double r = HPReal(kappa, 128).to_double();
    EXPECT_NEAR(cm.kappa_nu.to_double(), solve_nu(HPReal(kappa / 2, 128)).to_double() * r, 1e-9);
    double lk = std::log(1 / kappa);
    c.push_back(cm.exponent_bound / (std::log(lk) / lk));
  }
  // One constant c fits the whole sweep.
  EXPECT_LE(*std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end()), 1.5);
}

TEST(CostModel, LeadingTermOfNu) {
  CostModel cm = cost_model(1ull << 32, 1, 1, 1e-6);
  EXPECT_NEAR(cm.nu_ratio, 1.0, 0.25);
  EXPECT_EQ(cm.M, column_count_string(cm.m_int, cm.d_int));
}

TEST(CostModel, Preconditions) {
  EXPECT_THROW(cost_model(1024, 1, 1, 0.5), DomainError);
  EXPECT_THROW(cost_model(1024, 0, 1, 0.1), DomainError);
  EXPECT_THROW(cost_model(1, 1, 1, 0.1), DomainError);
}

TEST(KdeIo, CsvWithHeaderAndComments) {
  CsvMatrix mat = parse_csv_matrix("x,y\n# note\n1,2\n\n3.5,-4e-3\n");
  EXPECT_EQ(mat.rows, 2u);
  EXPECT_EQ(mat.cols, 2u);
  EXPECT_EQ(mat.data, (std::vector<double>{1, 2, 3.5, -4e-3}));
  EXPECT_THROW(parse_csv_matrix("1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("1,2\n3,abc\n"), ParseError);
  EXPECT_THROW(parse_csv_matrix("# only\n"), ParseError);
}

TEST(KdeIo, InstanceJsonRoundTrip) {
  KdeInstance inst = random_instance(5, 2, 4, HPReal(1e-3, 128), 3);
  KdeInstance back = parse_instance_json(render_instance_json(inst));
  EXPECT_EQ(back.n, inst.n);
  EXPECT_EQ(back.m, inst.m);
  EXPECT_EQ(back.X, inst.X);
  EXPECT_EQ(back.Y, inst.Y);
  EXPECT_EQ(back.w, inst.w);
  ASSERT_TRUE(back.B.has_value());
  EXPECT_NEAR(back.delta.to_double(), 1e-3, 1e-18);
}

TEST(KdeIo, InstanceJsonValidation) {
  EXPECT_THROW(parse_instance_json("{"), ParseError);
  EXPECT_THROW(parse_instance_json(R"({"n":1,"m":1,"x":[[0]],"y":[[0]],"w":[1]})"), ParseError);
  EXPECT_THROW(parse_instance_json(R"({"n":2,"m":1,"x":[[0]],"y":[[0]],"w":[1],"delta":0.1})"), ParseError);
  KdeInstance inst = parse_instance_json(R"({"n":1,"m":1,"x":[[0]],"y":[[0]],"w":[1],"delta":"1e-300"})");
  EXPECT_FALSE(inst.delta.is_zero());
  EXPECT_LT(inst.delta.exponent(), -990);
}

TEST(Bench, SmallSweepReportsRows) {
  BenchReport rep = run_bench({32, 64}, 2, 4, HPReal(1e-3, 128), 1);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const BenchRow& r : rep.rows) EXPECT_LE(r.error_ratio, 1e-3);
  EXPECT_EQ(rep.M, binomial(4 + 2 * rep.degree, 2 * rep.degree));
}

TEST(Bench, SlopeFit) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}), 2.0, 1e-12);
  EXPECT_THROW(loglog_slope({1}, {1}), DomainError);
}
