#include "artc/classic_tests.hpp"
#include "artc/errors.hpp"
#include "artc/rank_align.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace artc;

namespace {

using Sample = std::vector<double>;

/// Exact two-sided permutation p of U over every split of the pooled midranks.
double mann_whitney_exact(const Sample& x, const Sample& y) {
  Sample pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  const Eigen::VectorXd r = midrank(std::span<const double>(pooled));
  const int n = static_cast<int>(pooled.size()), n1 = static_cast<int>(x.size());
  const double center = n1 * (n - n1) / 2.0;
  const double base = n1 * (n1 + 1) / 2.0;
  const double observed = std::abs(r.head(n1).sum() - base - center);
  int total = 0, extreme = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != n1) continue;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) sum += r[i];
    ++total;
    if (std::abs(sum - base - center) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / total;
}

/// Exact two-sided p of W over all sign assignments of the nonzero differences.
double wilcoxon_exact(const Sample& x, const Sample& y) {
  Sample d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  Sample abs_d(d.size());
  std::transform(d.begin(), d.end(), abs_d.begin(), [](double v) { return std::abs(v); });
  const Eigen::VectorXd r = midrank(std::span<const double>(abs_d));
  const int n = static_cast<int>(d.size());
  const double center = r.sum() / 2.0;
  double w = 0.0;
  for (int i = 0; i < n; ++i)
    if (d[static_cast<std::size_t>(i)] > 0) w += r[i];
  const double observed = std::abs(w - center);
  int extreme = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s += r[i];
    if (std::abs(s - center) >= observed - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(1u << n);
}

Sample shifted(const Sample& d, double base) {
  Sample out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [&](double v) { return base + v; });
  return out;
}

}  // namespace

TEST(TTest, PairedIdenticalIsDegenerate) {
  const Sample x{1, 2, 3, 4};
  EXPECT_THROW(t_test(x, x, true), DegenerateVarianceError);
}

TEST(TTest, UnpairedIdenticalSamples) {
  const Sample x{1, 2, 3};
  const TestResult r = t_test(x, x, false);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.method, ClassicMethod::t_ind);
}

TEST(TTest, ZeroVarianceCases) {
  const Sample a{2, 2, 2}, b{2, 2}, c{5, 5};
  EXPECT_EQ(t_test(a, b, false).p, 1.0);
  EXPECT_THROW(t_test(a, c, false), DegenerateVarianceError);
}

TEST(TTest, KnownValues) {
  // Pooled: means 2 and 5, pooled variance 1, se = sqrt(2/3), t = -3.674..., df 4
  const Sample x{1, 2, 3}, y{4, 5, 6};
  const TestResult r = t_test(x, y, false);
  EXPECT_NEAR(r.statistic, -3.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(r.p, 0.021311641128756, 1e-9);
  // Paired: d = [-1, -2, 0, -1], mean -1, sd sqrt(2/3), t = -2.449..., df 3
  const Sample u{1, 2, 3, 4}, v{2, 4, 3, 5};
  const TestResult p = t_test(u, v, true);
  EXPECT_NEAR(p.statistic, -1.0 / (std::sqrt(2.0 / 3.0) / 2.0), 1e-12);
  EXPECT_NEAR(p.p, 0.091721113311572, 1e-9);
  EXPECT_EQ(p.method, ClassicMethod::t_paired);
}

TEST(TTest, PreconditionsEnforced) {
  EXPECT_THROW(t_test(Sample{1}, Sample{1, 2}, false), InvalidArgumentError);
  EXPECT_THROW(t_test(Sample{1, 2}, Sample{1, 2, 3}, true), InvalidArgumentError);
}

TEST(TTest, DetectsUnitShiftMostOfTheTime) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  int rejections = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Sample x(40), y(40);
    for (double& v : x) v = normal(rng);
    for (double& v : y) v = 1.0 + normal(rng);
    if (t_test(x, y, false).p < 0.05) ++rejections;
  }
  EXPECT_GT(rejections, 100);
}

TEST(MannWhitney, CompleteSeparation) {
  const TestResult r = mann_whitney_u(Sample{1, 2}, Sample{3, 4});
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.method, ClassicMethod::mann_whitney);
}

TEST(MannWhitney, SameMultiset) {
  const TestResult r = mann_whitney_u(Sample{3, 1, 2, 2}, Sample{2, 3, 2, 1});
  EXPECT_EQ(r.statistic, 8.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(MannWhitney, AllTied) { EXPECT_EQ(mann_whitney_u(Sample{2, 2}, Sample{2, 2, 2}).p, 1.0); }

TEST(MannWhitney, TieCorrectedNormalApproximation) {
  // pooled {1,2,2,3 | 3,4,4,5}: R1 = 1 + 2.5 + 2.5 + 4.5 = 10.5, U = 0.5
  // ties: three pairs, sum(t^3 - t) = 18; var = 16/12 * (9 - 18/56)
  const TestResult r = mann_whitney_u(Sample{1, 2, 2, 3}, Sample{3, 4, 4, 5});
  EXPECT_DOUBLE_EQ(r.statistic, 0.5);
  const double var = 16.0 / 12.0 * (9.0 - 18.0 / 56.0);
  EXPECT_NEAR(r.p, std::erfc(std::abs(0.5 - 8.0) / std::sqrt(var) / std::sqrt(2.0)), 1e-12);
}

TEST(MannWhitney, TieHeavyAgreesWithPermutationOracle) {
  const Sample x{1, 2, 2, 3}, y{3, 4, 4, 5};
  EXPECT_NEAR(mann_whitney_u(x, y).p, mann_whitney_exact(x, y), 0.05);
  const Sample a{1, 2, 3, 4}, b{5, 6, 7, 8};
  EXPECT_NEAR(mann_whitney_u(a, b).p, mann_whitney_exact(a, b), 0.05);
}

TEST(MannWhitney, PermutationOracleSanity) {
  // Complete separation of 4 vs 4: 2 of 70 splits are as extreme.
  EXPECT_NEAR(mann_whitney_exact(Sample{1, 2, 3, 4}, Sample{5, 6, 7, 8}), 2.0 / 70.0, 1e-15);
}

TEST(Wilcoxon, AllZeroDifferences) {
  const Sample x{1, 2, 3};
  const TestResult r = wilcoxon_signed_rank(x, x);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.statistic, 0.0);
}

TEST(Wilcoxon, AllPositiveIsMaximal) {
  const TestResult r = wilcoxon_signed_rank(Sample{2, 4, 6}, Sample{1, 2, 3});
  EXPECT_EQ(r.statistic, 6.0);
  EXPECT_EQ(r.method, ClassicMethod::wilcoxon_sr);
}

TEST(Wilcoxon, ZerosDroppedAndTiesCorrected) {
  // d = [1, -1, 2, 0]: zero dropped, |d| ranks 1.5, 1.5, 3, W = 4.5
  const TestResult r = wilcoxon_signed_rank(Sample{2, 1, 5, 7}, Sample{1, 2, 3, 7});
  EXPECT_DOUBLE_EQ(r.statistic, 4.5);
  const double var = 3.0 * 4.0 * 7.0 / 24.0 - 6.0 / 48.0;
  EXPECT_NEAR(r.p, std::erfc(std::abs(4.5 - 3.0) / std::sqrt(var) / std::sqrt(2.0)), 1e-12);
}

TEST(Wilcoxon, MixedSignsAgreeWithSignFlipOracle) {
  for (const Sample& d : {Sample{5, 4, -3, 5, 1, 4}, Sample{4, -1, 3, 3, -2, 5}}) {
    const Sample x = shifted(d, 10.0), y(6, 10.0);
    EXPECT_NEAR(wilcoxon_signed_rank(x, y).p, wilcoxon_exact(x, y), 0.05);
  }
}

TEST(Wilcoxon, UnequalLengthsRejected) {
  EXPECT_THROW(wilcoxon_signed_rank(Sample{1, 2}, Sample{1}), InvalidArgumentError);
}

TEST(ClassicProperties, SwapInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 50; ++rep) {
    Sample x(8), y(rep % 2 ? 8 : 6);
    for (double& v : x) v = std::round(normal(rng) * 4) / 4;
    for (double& v : y) v = std::round(normal(rng) * 4) / 4 + 0.3;
    EXPECT_NEAR(mann_whitney_u(x, y).p, mann_whitney_u(y, x).p, 1e-12);
    EXPECT_NEAR(t_test(x, y, false).p, t_test(y, x, false).p, 1e-12);
    if (x.size() == y.size()) {
      EXPECT_NEAR(wilcoxon_signed_rank(x, y).p, wilcoxon_signed_rank(y, x).p, 1e-12);
      EXPECT_NEAR(t_test(x, y, true).p, t_test(y, x, true).p, 1e-12);
    }
  }
}

TEST(ClassicProperties, RankTestsInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 50; ++rep) {
    Sample x(8), y(8);
    for (double& v : x) v = std::round(normal(rng) * 2) / 2;
    for (double& v : y) v = std::round(normal(rng) * 2) / 2 + 0.5;
    auto f = [](const Sample& s) {
      Sample out(s.size());
      std::transform(s.begin(), s.end(), out.begin(), [](double v) { return std::exp(v) + 3.0; });
      return out;
    };
    EXPECT_EQ(mann_whitney_u(x, y).p, mann_whitney_u(f(x), f(y)).p);
  }
  // Signed-rank ranks |x - y|, so only transforms that preserve the order of
  // absolute differences apply: positive scaling.
  for (int rep = 0; rep < 50; ++rep) {
    Sample x(8), y(8);
    for (double& v : x) v = std::round(normal(rng) * 2) / 2;
    for (double& v : y) v = std::round(normal(rng) * 2) / 2;
    auto f = [](const Sample& s) {
      Sample out(s.size());
      std::transform(s.begin(), s.end(), out.begin(), [](double v) { return 4.0 * v; });
      return out;
    };
    EXPECT_EQ(wilcoxon_signed_rank(x, y).p, wilcoxon_signed_rank(f(x), f(y)).p);
  }
}

TEST(ClassicProperties, TTestAffineInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 50; ++rep) {
    Sample x(10), y(10);
    for (double& v : x) v = normal(rng);
    for (double& v : y) v = normal(rng) + 0.4;
    auto f = [](const Sample& s) {
      Sample out(s.size());
      std::transform(s.begin(), s.end(), out.begin(), [](double v) { return 2.5 * v - 7.0; });
      return out;
    };
    EXPECT_NEAR(t_test(x, y, false).p, t_test(f(x), f(y), false).p, 1e-10);
    EXPECT_NEAR(t_test(x, y, true).p, t_test(f(x), f(y), true).p, 1e-10);
  }
}

TEST(ClassicProperties, PValuesInUnitInterval) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(0, 3);
  for (int rep = 0; rep < 200; ++rep) {
    Sample x(5), y(5);
    for (double& v : x) v = small(rng);
    for (double& v : y) v = small(rng);
    for (const TestResult& r : {mann_whitney_u(x, y), wilcoxon_signed_rank(x, y)}) {
      EXPECT_GE(r.p, 0.0);
      EXPECT_LE(r.p, 1.0);
    }
  }
}
