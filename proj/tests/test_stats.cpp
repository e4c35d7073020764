#include "trendagg/stats.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace trendagg;
using namespace trendagg::stats;

TEST(SignTest, TabulatedValues) {
  EXPECT_NEAR(sign_binomial_test(47, 100).p_value, 0.6173, 5e-5);
  EXPECT_NEAR(sign_binomial_test(69, 100).p_value, 0.0002, 5e-5);
}

TEST(SignTest, CentralValueCapsAtOne) {
  EXPECT_EQ(sign_binomial_test(50, 100).p_value, 1.0);
  EXPECT_EQ(sign_binomial_test(3, 6).p_value, 1.0);
}

TEST(SignTest, TwoSidedSymmetryAndExactSmallCase) {
  for (std::size_t k = 0; k <= 30; ++k) {
    const double a = sign_binomial_test(k, 30).p_value, b = sign_binomial_test(30 - k, 30).p_value;
    EXPECT_NEAR(a, b, 1e-12 * a);
  }
  // n = 5, k = 0: 2 * (1/32).
  EXPECT_NEAR(sign_binomial_test(0, 5).p_value, 2.0 / 32.0, 1e-15);
  EXPECT_THROW(sign_binomial_test(6, 5), InvalidInput);
}

TEST(FisherTest, StatedAnchor) {
  EXPECT_NEAR(fisher_p_value(0.1870, 97), 0.0624, 5e-4);
  EXPECT_EQ(fisher_p_value(0.0, 50), 1.0);
  EXPECT_EQ(fisher_p_value(1.0, 50), 0.0);
  EXPECT_THROW(fisher_p_value(0.3, 0), InvalidInput);
}

TEST(FisherTest, PearsonUsesNMinusThree) {
  std::mt19937_64 rng(2);
  const auto x = oracle::normals(100, rng), y = oracle::normals(100, rng);
  const auto r = pearson(x, y);
  EXPECT_EQ(r.n, 100u);
  EXPECT_DOUBLE_EQ(r.p_value, fisher_p_value(r.r, 97));
}

TEST(Pearson, MatchesDirectFormula) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = oracle::normals(57, rng), y = oracle::normals(57, rng);
    EXPECT_NEAR(pearson(x, y).r, oracle::pearson(x, y), 1e-12);
  }
}

TEST(Pearson, AffineInvariance) {
  std::mt19937_64 rng(4);
  const auto x = oracle::normals(40, rng), y = oracle::normals(40, rng);
  std::vector<double> up(40), down(40);
  for (int i = 0; i < 40; ++i) {
    up[i] = 3.5 * x[i] + 7;
    down[i] = -2 * x[i] + 1;
  }
  EXPECT_NEAR(pearson(up, y).r, pearson(x, y).r, 1e-12);
  EXPECT_NEAR(pearson(down, y).r, -pearson(x, y).r, 1e-12);
}

TEST(Pearson, RejectsDegenerateInput) {
  EXPECT_THROW(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), InvalidInput);
  EXPECT_THROW(pearson(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4}), InvalidInput);
  EXPECT_THROW(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3}), InvalidInput);
}

TEST(CrossCorrelation, ZeroLagIsPearson) {
  std::mt19937_64 rng(5);
  const auto x = oracle::normals(30, rng), y = oracle::normals(30, rng);
  EXPECT_EQ(cross_correlation(x, y, 0).r, pearson(x, y).r);
}

TEST(CrossCorrelation, ShiftedCopyAlignsAtItsLag) {
  std::mt19937_64 rng(6);
  const auto base = oracle::normals(60, rng);
  // x[t + 3] = y[t]: x is y delayed by three periods.
  std::vector<double> xs(57), ys(57);
  for (int t = 0; t < 57; ++t) {
    ys[t] = base[t];
    xs[t] = t >= 3 ? base[t - 3] : 100.0 + t;
  }
  const auto r = cross_correlation(xs, ys, 3);
  EXPECT_NEAR(r.r, 1.0, 1e-12);
  EXPECT_EQ(r.n, 54u);
}

TEST(CrossCorrelation, NegativeLagMatchesIndexArithmetic) {
  std::mt19937_64 rng(7);
  const auto x = oracle::normals(50, rng), y = oracle::normals(50, rng);
  const int lag = -5;
  std::vector<double> a, b;
  for (int t = 0; t < 50; ++t) {
    if (t + lag < 0 || t + lag >= 50) continue;
    a.push_back(x[t + lag]);
    b.push_back(y[t]);
  }
  const auto r = cross_correlation(x, y, lag);
  EXPECT_EQ(r.n, 45u);
  EXPECT_NEAR(r.r, oracle::pearson(a, b), 1e-12);
  EXPECT_THROW(cross_correlation(x, y, 48), InvalidInput);
}

TEST(PartialCorrelation, EqualPairwiseHalfGivesOneThird) {
  // u, v, w are orthonormal and centered, so x = u + v, y = u + w, z = v + w
  // have every pairwise correlation equal to 1/2.
  const std::vector<double> u{1, -1, 0, 0}, v{0, 0, 1, -1}, w{1, 1, -1, -1};
  std::vector<double> x(4), y(4), z(4);
  for (int i = 0; i < 4; ++i) {
    x[i] = u[i] / std::sqrt(2) + v[i] / std::sqrt(2);
    y[i] = u[i] / std::sqrt(2) + w[i] / 2;
    z[i] = v[i] / std::sqrt(2) + w[i] / 2;
  }
  std::vector<double> x5 = x, y5 = y, z5 = z;
  // Appending the mean keeps the correlations and reaches n = 5.
  x5.push_back(0);
  y5.push_back(0);
  z5.push_back(0);
  ASSERT_NEAR(oracle::pearson(x5, y5), 0.5, 1e-12);
  ASSERT_NEAR(oracle::pearson(x5, z5), 0.5, 1e-12);
  ASSERT_NEAR(oracle::pearson(y5, z5), 0.5, 1e-12);
  EXPECT_NEAR(partial_correlation(x5, y5, z5).r, 1.0 / 3.0, 1e-12);
}

TEST(PartialCorrelation, MatchesResidualRegressionOracle) {
  std::mt19937_64 rng(8);
  const auto z = oracle::normals(80, rng), ex = oracle::normals(80, rng), ey = oracle::normals(80, rng);
  std::vector<double> x(80), y(80);
  for (int i = 0; i < 80; ++i) {
    x[i] = 2 * z[i] + ex[i];
    y[i] = -z[i] + 0.5 * ex[i] + ey[i];
  }
  auto residual = [&](const std::vector<double>& a) {
    oracle::Matrix X;
    for (int i = 0; i < 80; ++i) X.push_back({1.0, z[i]});
    const auto b = oracle::normal_equations(X, a);
    std::vector<double> r(80);
    for (int i = 0; i < 80; ++i) r[i] = a[i] - b[0] - b[1] * z[i];
    return r;
  };
  const auto pr = partial_correlation(x, y, z);
  EXPECT_NEAR(pr.r, oracle::pearson(residual(x), residual(y)), 1e-12);
  EXPECT_NEAR(pr.p_value, fisher_p_value(pr.r, 76), 1e-15);
}

TEST(PartialCorrelation, SymmetricInXAndY) {
  std::mt19937_64 rng(9);
  const auto x = oracle::normals(30, rng), y = oracle::normals(30, rng), z = oracle::normals(30, rng);
  EXPECT_DOUBLE_EQ(partial_correlation(x, y, z).r, partial_correlation(y, x, z).r);
}

TEST(PartialCorrelation, IndependentControlLeavesCorrelationAlmostUnchanged) {
  std::mt19937_64 rng(10);
  const auto s = oracle::normals(20000, rng), ex = oracle::normals(20000, rng), ey = oracle::normals(20000, rng),
             z = oracle::normals(20000, rng);
  std::vector<double> x(20000), y(20000);
  for (int i = 0; i < 20000; ++i) {
    x[i] = s[i] + ex[i];
    y[i] = s[i] + ey[i];
  }
  EXPECT_NEAR(partial_correlation(x, y, z).r, pearson(x, y).r, 0.01);
}

TEST(PartialCorrelation, ControlEqualToXIsAnError) {
  std::mt19937_64 rng(11);
  const auto x = oracle::normals(20, rng), y = oracle::normals(20, rng);
  EXPECT_THROW(partial_correlation(x, y, x), InvalidInput);
}

TEST(Spearman, AverageRanksForTies) {
  EXPECT_EQ(ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 4, 9, 16}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
}
