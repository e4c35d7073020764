#pragma once

// Partitioning around medoids (BUILD then SWAP) with silhouette widths.

#include "trendagg/tsanalysis/series.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace trendagg::ts {

struct Clustering {
  std::size_t k = 0;
  /// Point indices of the medoids; cluster c has medoid medoids[c].
  std::vector<std::size_t> medoids;
  std::vector<std::size_t> assignment;
  double total_cost = 0;
  std::vector<double> silhouette;
  /// Total cost after BUILD and after each accepted swap.
  std::vector<double> cost_history;
};

namespace detail {

inline double assignment_cost(const Eigen::MatrixXd& d, const std::vector<std::size_t>& medoids) {
  double cost = 0;
  for (Eigen::Index j = 0; j < d.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (auto m : medoids) best = std::min(best, d(j, static_cast<Eigen::Index>(m)));
    cost += best;
  }
  return cost;
}

}  // namespace detail

/// Nearest-medoid assignment; a medoid always belongs to its own cluster,
/// other ties go to the lower cluster index.
inline std::vector<std::size_t> assign_to_medoids(const DistanceMatrix& dm,
                                                  const std::vector<std::size_t>& medoids) {
  const auto& d = dm.d();
  std::vector<std::size_t> out(dm.size());
  for (std::size_t j = 0; j < dm.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      if (medoids[c] == j) {
        best = c;
        break;
      }
      if (d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(medoids[c])) <
          d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(medoids[best]))) {
        best = c;
      }
    }
    out[j] = best;
  }
  return out;
}

/// Silhouette widths; points in singleton clusters (and every point when k = 1) get 0.
inline std::vector<double> silhouette_widths(const DistanceMatrix& dm, const std::vector<std::size_t>& assignment,
                                             std::size_t k) {
  const std::size_t n = dm.size();
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) ++sizes[a];
  std::vector<double> s(n, 0.0);
  if (k < 2) return s;
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[assignment[i]] < 2) continue;
    std::vector<double> sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[assignment[j]] += dm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double a = sum[assignment[i]] / static_cast<double>(sizes[assignment[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != assignment[i] && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0 ? (b - a) / denom : 0.0;
  }
  return s;
}

/// PAM. Ties in BUILD and SWAP are broken by a seeded permutation of the points.
inline Clustering k_medoids(const DistanceMatrix& dm, std::size_t k, std::uint64_t seed = 1) {
  const std::size_t n = dm.size();
  if (k < 1 || k > n) throw InvalidInput("k_medoids: k must lie in [1, n]");
  const auto& d = dm.d();
  auto D = [&](std::size_t i, std::size_t j) { return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // BUILD
  std::vector<std::size_t> medoids;
  std::vector<bool> is_medoid(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (medoids.size() < k) {
    std::size_t best = n;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (auto i : order) {
      if (is_medoid[i]) continue;
      double gain = 0;
      if (medoids.empty()) {
        for (std::size_t j = 0; j < n; ++j) gain -= D(j, i);
      } else {
        for (std::size_t j = 0; j < n; ++j) gain += std::max(nearest[j] - D(j, i), 0.0);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], D(j, best));
  }

  Clustering out;
  out.k = k;
  double cost = detail::assignment_cost(d, medoids);
  out.cost_history.push_back(cost);

  // SWAP: apply the best improving (medoid, non-medoid) exchange until none improves.
  for (;;) {
    double best_cost = cost;
    std::size_t best_slot = k, best_h = n;
    for (std::size_t slot = 0; slot < k; ++slot) {
      for (auto h : order) {
        if (is_medoid[h]) continue;
        auto trial = medoids;
        trial[slot] = h;
        const double c = detail::assignment_cost(d, trial);
        if (c < best_cost - 1e-12 * std::max(1.0, cost)) {
          best_cost = c;
          best_slot = slot;
          best_h = h;
        }
      }
    }
    if (best_slot == k) break;
    is_medoid[medoids[best_slot]] = false;
    is_medoid[best_h] = true;
    medoids[best_slot] = best_h;
    cost = best_cost;
    out.cost_history.push_back(cost);
  }

  out.medoids = medoids;
  out.assignment = assign_to_medoids(dm, medoids);
  out.total_cost = 0;
  for (std::size_t j = 0; j < n; ++j) out.total_cost += D(j, medoids[out.assignment[j]]);
  out.silhouette = silhouette_widths(dm, out.assignment, k);
  return out;
}

}  // namespace trendagg::ts
