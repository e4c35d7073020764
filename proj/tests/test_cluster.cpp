#include "trendagg/tsanalysis/cluster.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace trendagg;
using namespace trendagg::ts;

namespace {

DistanceMatrix from_points(const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (P.row(i) - P.row(j)).norm();
  }
  ItemList labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  return {labels, d};
}

DistanceMatrix random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 10);
  Eigen::MatrixXd P(static_cast<Eigen::Index>(n), 2);
  for (auto& v : P.reshaped()) v = u(rng);
  return from_points(P);
}

}  // namespace

TEST(KMedoids, EveryPointItsOwnMedoidWhenKEqualsN) {
  const auto dm = random_points(6, 1);
  const auto c = k_medoids(dm, 6);
  EXPECT_EQ(c.total_cost, 0.0);
  EXPECT_EQ(std::set<std::size_t>(c.medoids.begin(), c.medoids.end()).size(), 6u);
  for (double s : c.silhouette) EXPECT_EQ(s, 0.0);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(c.medoids[c.assignment[i]], i);
}

TEST(KMedoids, SeparatedBlobsAreRecovered) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd P(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) P.row(i) << u(rng) + (i < 10 ? 0 : 100), u(rng);
  const auto c = k_medoids(from_points(P), 2, 5);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_EQ(c.assignment[static_cast<std::size_t>(i)] == c.assignment[0], i < 10);
  for (double s : c.silhouette) EXPECT_GT(s, 0.9);
}

TEST(KMedoids, NoSingleSwapImproves) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dm = random_points(25, seed);
    const auto c = k_medoids(dm, 4, seed);
    std::set<std::size_t> med(c.medoids.begin(), c.medoids.end());
    for (std::size_t slot = 0; slot < 4; ++slot) {
      for (std::size_t h = 0; h < 25; ++h) {
        if (med.count(h)) continue;
        auto trial = c.medoids;
        trial[slot] = h;
        double cost = 0;
        for (Eigen::Index j = 0; j < 25; ++j) {
          double best = 1e300;
          for (auto m : trial) best = std::min(best, dm(j, static_cast<Eigen::Index>(m)));
          cost += best;
        }
        EXPECT_GE(cost, c.total_cost - 1e-9);
      }
    }
  }
}

TEST(KMedoids, CostHistoryIsNonIncreasingAndMedoidsAreMembers) {
  const auto dm = random_points(40, 7);
  const auto c = k_medoids(dm, 5, 3);
  for (std::size_t i = 1; i < c.cost_history.size(); ++i) EXPECT_LE(c.cost_history[i], c.cost_history[i - 1]);
  EXPECT_NEAR(c.cost_history.back(), c.total_cost, 1e-9);
  for (auto m : c.medoids) EXPECT_LT(m, 40u);
}

TEST(KMedoids, SingleClusterHasZeroSilhouette) {
  const auto c = k_medoids(random_points(8, 4), 1);
  for (double s : c.silhouette) EXPECT_EQ(s, 0.0);
  for (auto a : c.assignment) EXPECT_EQ(a, 0u);
}

TEST(KMedoids, DeterministicInSeedAndRejectsBadK) {
  const auto dm = random_points(15, 8);
  EXPECT_EQ(k_medoids(dm, 3, 11).medoids, k_medoids(dm, 3, 11).medoids);
  EXPECT_THROW(k_medoids(dm, 0), InvalidInput);
  EXPECT_THROW(k_medoids(dm, 16), InvalidInput);
}

TEST(Silhouette, HandComputedExample) {
  // Points on a line: 0, 1 | 5.
  Eigen::MatrixXd P(3, 1);
  P << 0, 1, 5;
  const auto dm = from_points(P);
  const auto s = silhouette_widths(dm, {0, 0, 1}, 2);
  EXPECT_NEAR(s[0], (5.0 - 1.0) / 5.0, 1e-12);
  EXPECT_NEAR(s[1], (4.0 - 1.0) / 4.0, 1e-12);
  EXPECT_EQ(s[2], 0.0);
}
