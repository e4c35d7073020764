#pragma once

// Metric multidimensional scaling by stress majorization (SMACOF) with unit
// weights.

#include "trendagg/tsanalysis/series.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace trendagg::ts {

struct Embedding {
  Eigen::MatrixXd coordinates;
  /// Normalized stress-1: sqrt(sum (delta - d)^2 / sum delta^2) over pairs.
  double stress = 0;
  std::size_t iterations = 0;
  /// Stress after each Guttman transform.
  std::vector<double> stress_history;
};

struct SmacofOptions {
  std::size_t dims = 2;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
  std::size_t max_iter = 1000;
  /// Independent random starts drawn from the seed.
  std::size_t starts = 4;
};

/// Stress at which a configuration is treated as exact.
inline constexpr double kStressFloor = 1e-14;

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (X.row(i) - X.row(j)).norm();
  }
  return d;
}

inline double normalized_stress(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd d = pairwise_distances(X);
  double num = 0, den = 0;
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < delta.cols(); ++j) {
      num += (delta(i, j) - d(i, j)) * (delta(i, j) - d(i, j));
      den += delta(i, j) * delta(i, j);
    }
  }
  return std::sqrt(num / den);
}

/// Guttman transform X+ = B(X) X / n.
inline Eigen::MatrixXd guttman_transform(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd d = pairwise_distances(X);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && d(i, j) > 0) B(i, j) = -delta(i, j) / d(i, j);
    }
    B(i, i) = -B.row(i).sum();
  }
  return B * X / static_cast<double>(n);
}

namespace detail {

inline Embedding smacof_from(const Eigen::MatrixXd& delta, Eigen::MatrixXd X, const SmacofOptions& opt) {
  Embedding out;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    X = guttman_transform(delta, X);
    const double stress = normalized_stress(delta, X);
    out.stress_history.push_back(stress);
    out.iterations = it + 1;
    const bool converged = std::isfinite(previous) && (previous - stress) <= opt.tolerance * previous;
    previous = stress;
    if (converged || stress <= kStressFloor) break;
  }
  out.coordinates = std::move(X);
  out.stress = previous;
  return out;
}

}  // namespace detail

/// SMACOF from seeded uniform random starts; the run with the lowest final
/// stress is returned. Each run stops when the relative change in stress falls
/// below the tolerance or after max_iter transforms.
inline Embedding smacof_mds(const DistanceMatrix& dm, const SmacofOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(dm.size());
  if (n < 2) throw InvalidInput("smacof: need at least 2 points");
  if (opt.dims < 1) throw InvalidInput("smacof: need at least 1 dimension");
  if (opt.starts < 1) throw InvalidInput("smacof: need at least 1 start");
  const Eigen::MatrixXd& delta = dm.d();
  if (delta.maxCoeff() <= 0) throw InvalidInput("smacof: all distances are zero");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double scale = delta.maxCoeff();
  Embedding best;
  for (std::size_t start = 0; start < opt.starts; ++start) {
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(opt.dims));
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = scale * unif(rng);
    X.rowwise() -= X.colwise().mean();
    auto run = detail::smacof_from(delta, std::move(X), opt);
    if (start == 0 || run.stress < best.stress) best = std::move(run);
  }
  return best;
}

}  // namespace trendagg::ts
