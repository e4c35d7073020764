#include "trendagg/nowcast/ols.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace trendagg;
using namespace trendagg::nowcast;

namespace {

Eigen::MatrixXd to_eigen(const oracle::Matrix& X) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(X.front().size()));
  for (std::size_t r = 0; r < X.size(); ++r) {
    for (std::size_t c = 0; c < X[r].size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = X[r][c];
  }
  return out;
}

}  // namespace

TEST(Ols, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  oracle::Matrix X;
  std::vector<double> y;
  for (int r = 0; r < 40; ++r) {
    std::vector<double> row{1.0};
    for (int c = 0; c < 4; ++c) row.push_back(z(rng));
    y.push_back(2 + row[1] - 3 * row[3] + z(rng));
    X.push_back(row);
  }
  const auto expected = oracle::normal_equations(X, y);
  const auto fit = ols_fit(to_eigen(X), Eigen::Map<const Eigen::VectorXd>(y.data(), 40));
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(fit.coefficients[c], expected[static_cast<std::size_t>(c)], 1e-10);
  double sse = 0;
  for (int r = 0; r < 40; ++r) {
    double f = 0;
    for (int c = 0; c < 5; ++c) f += X[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * expected[static_cast<std::size_t>(c)];
    sse += (y[static_cast<std::size_t>(r)] - f) * (y[static_cast<std::size_t>(r)] - f);
  }
  EXPECT_NEAR(fit.sse, sse, 1e-9 * sse);
  EXPECT_NEAR(fit.sigma2, sse / 40, 1e-9);
  EXPECT_EQ(fit.n_parameters(), 6u);
}

TEST(Ols, ExactLinearDataIsRecovered) {
  Eigen::MatrixXd X(6, 2);
  X << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4, 1, 5;
  const Eigen::VectorXd y = 3.0 + 0.5 * X.col(1).array();
  const auto fit = ols_fit(X, y);
  EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-12);
  EXPECT_NEAR(fit.coefficients[1], 0.5, 1e-12);
  EXPECT_LT(fit.sse, 1e-20);
}

TEST(Ols, InterceptOnlyFitIsTheMean) {
  Eigen::VectorXd y(5);
  y << 4, 8, 15, 16, 23;
  const auto fit = ols_fit(Eigen::MatrixXd::Ones(5, 1), y);
  EXPECT_NEAR(fit.coefficients[0], y.mean(), 1e-12);
}

TEST(Ols, ResidualsAreOrthogonalToColumns) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(30, 3);
  Eigen::VectorXd y(30);
  for (int r = 0; r < 30; ++r) {
    X(r, 0) = 1;
    X(r, 1) = z(rng);
    X(r, 2) = z(rng);
    y[r] = z(rng);
  }
  const auto fit = ols_fit(X, y);
  const Eigen::VectorXd g = X.transpose() * (y - fit.fitted);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ols, RankDeficientDesignNamesTheAliasedColumn) {
  Eigen::MatrixXd X(8, 3);
  for (int r = 0; r < 8; ++r) {
    X(r, 0) = 1;
    X(r, 1) = r * r;
    X(r, 2) = 2 + 3 * r * r;
  }
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(8, 1, 8);
  const std::vector<std::string> names{"intercept", "apple", "banana"};
  try {
    ols_fit(X, y, names);
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.columns(), std::vector<std::size_t>{2});
    EXPECT_NE(std::string(e.what()).find("banana"), std::string::npos);
  }
}

TEST(Ols, DroppingAliasedColumnsMatchesReducedFit) {
  Eigen::MatrixXd X(10, 4);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z;
  for (int r = 0; r < 10; ++r) {
    X(r, 0) = 1;
    X(r, 1) = z(rng);
    X(r, 2) = 2 * X(r, 1) - 1;
    X(r, 3) = z(rng);
  }
  Eigen::VectorXd y(10);
  for (int r = 0; r < 10; ++r) y[r] = z(rng);
  const auto dropped = ols_fit_dropping_aliased(X, y);
  EXPECT_EQ(dropped.aliased, std::vector<std::size_t>{2});
  EXPECT_EQ(dropped.coefficients[2], 0.0);
  EXPECT_EQ(dropped.n_parameters(), 4u);
  Eigen::MatrixXd Xr(10, 3);
  Xr << X.col(0), X.col(1), X.col(3);
  const auto reduced = ols_fit(Xr, y);
  EXPECT_NEAR(dropped.sse, reduced.sse, 1e-10);
}

TEST(Ols, DroppingHandlesMoreColumnsThanRows) {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(5, 8);
  for (int r = 0; r < 5; ++r) {
    X(r, 0) = 1;
    for (int c = 1; c < 8; ++c) X(r, c) = z(rng);
  }
  Eigen::VectorXd y(5);
  for (int r = 0; r < 5; ++r) y[r] = z(rng);
  const auto fit = ols_fit_dropping_aliased(X, y);
  EXPECT_EQ(fit.aliased.size(), 3u);
  EXPECT_LT(fit.sse, 1e-18);
  EXPECT_THROW(ols_fit(X, y), InvalidInput);
}

TEST(Aic, KnownValueAndPerfectFit) {
  EXPECT_DOUBLE_EQ(aic(3, -10.0), 26.0);
  EXPECT_THROW(aic(0, 0.0), InvalidInput);
  EXPECT_EQ(gaussian_log_likelihood(0.0, 10), std::numeric_limits<double>::infinity());
  // n = 2, SSE = 2: -(log(2 pi) + 1).
  EXPECT_NEAR(gaussian_log_likelihood(2.0, 2), -(std::log(2 * std::numbers::pi) + 1), 1e-14);
}

TEST(Mape, WorkedExamples) {
  EXPECT_NEAR(mape(std::vector<double>{100, 200}, std::vector<double>{110, 180}), 10.0, 1e-12);
  EXPECT_EQ(mape(std::vector<double>{5, 6}, std::vector<double>{5, 6}), 0.0);
  EXPECT_NEAR(mape(std::vector<double>{-50}, std::vector<double>{-55}), 10.0, 1e-12);
  EXPECT_THROW(mape(std::vector<double>{0, 1}, std::vector<double>{1, 1}), InvalidInput);
  EXPECT_THROW(mape(std::vector<double>{}, std::vector<double>{}), InvalidInput);
}

TEST(Mape, ScaleInvariant) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(1, 10);
  std::vector<double> y(20), f(20), ys(20), fs(20);
  for (int i = 0; i < 20; ++i) {
    y[i] = u(rng);
    f[i] = u(rng);
    ys[i] = 7 * y[i];
    fs[i] = 7 * f[i];
  }
  EXPECT_NEAR(mape(y, f), mape(ys, fs), 1e-10);
}
