#pragma once

// Synthetic latent search volumes and the pairwise max-normalize-and-round
// process that turns them into comparison scores.

#include "trendagg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace trendagg {

/// Log-normal static level x seasonal factor x geometric random walk.
struct VolumeProcess {
  double level_mu = 0.0;
  double level_sigma = 1.5;
  double seasonal_amplitude = 0.2;
  int seasonal_period = 12;
  double walk_sigma = 0.05;
  /// Common multiplier on all volumes; irrelevant to quantized output.
  double base_scale = 1.0e4;
};

struct SimulationConfig {
  std::size_t n_items = 100;
  std::size_t n_comparators = 10;
  std::size_t n_periods = 120;
  Period start{2008, 1};
  VolumeProcess process{};
  std::uint64_t seed = 1;

  void validate() const {
    if (n_items < 2) throw InvalidInput("simulation needs n_items >= 2");
    if (n_comparators < 1) throw InvalidInput("simulation needs n_comparators >= 1");
    if (n_periods < 2) throw InvalidInput("simulation needs T >= 2");
    if (process.level_sigma < 0 || process.walk_sigma < 0 || process.seasonal_amplitude < 0 ||
        process.seasonal_amplitude >= 1 || process.seasonal_period < 1 ||
        !(process.base_scale > 0)) {
      throw InvalidInput("invalid volume process parameters");
    }
  }
};

struct RatioBounds {
  double lower;
  double upper;

  bool contains(double r) const { return lower <= r && r <= upper; }
  double width() const { return upper - lower; }
};

struct SimulatedStudy {
  LatentVolumePanel items;
  LatentVolumePanel comparators;
};

namespace detail {

/// Independent stream per (seed, role, index); order of generation does not matter.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t role, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(role), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// One series of unit level: seasonal factor times geometric random walk.
inline Eigen::VectorXd shape_series(const VolumeProcess& p, std::size_t T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, 1.0);
  std::normal_distribution<double> step(0.0, 1.0);
  const double phase = phase_dist(rng) * p.seasonal_period;
  Eigen::VectorXd out(T);
  double log_walk = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) log_walk += p.walk_sigma * step(rng);
    const double season =
        1.0 + p.seasonal_amplitude *
                  std::sin(2.0 * std::numbers::pi * (static_cast<double>(t) + phase) /
                           p.seasonal_period);
    out[t] = season * std::exp(log_walk);
  }
  return out;
}

inline std::string numbered_id(char prefix, std::size_t k, std::size_t count) {
  const int width = count < 10 ? 1 : static_cast<int>(std::floor(std::log10(count))) + 1;
  std::string digits = std::to_string(k);
  return std::string(1, prefix) + std::string(std::max(0, width - static_cast<int>(digits.size())), '0') +
         digits;
}

/// Linear-interpolation quantile of sorted data, q in [0, 1].
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Items "I1".."In" (zero-padded) with strictly positive volumes. Deterministic in the seed.
inline LatentVolumePanel simulate_latent(const SimulationConfig& config) {
  config.validate();
  const auto& p = config.process;
  const std::size_t n = config.n_items, T = config.n_periods;
  Eigen::MatrixXd volumes(n, T);
  ItemList ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = detail::stream(config.seed, 0, i);
    std::normal_distribution<double> z(0.0, 1.0);
    const double level = std::exp(p.level_mu + p.level_sigma * z(rng));
    volumes.row(i) = p.base_scale * level * detail::shape_series(p, T, rng).transpose();
    ids.push_back(detail::numbered_id('I', i + 1, n));
  }
  return {std::move(ids), TimeAxis::monthly(config.start, T), std::move(volumes)};
}

/// Comparator series "C1".."Cm" whose total volumes sit at the quantiles
/// 1/(m+1), ..., m/(m+1) of the items' total volumes, so they span the range.
inline LatentVolumePanel simulate_comparators(const SimulationConfig& config,
                                              const LatentVolumePanel& items) {
  config.validate();
  const std::size_t m = config.n_comparators, T = items.n_periods();
  const Eigen::VectorXd totals = items.totals();
  std::vector<double> sorted(totals.data(), totals.data() + totals.size());
  std::sort(sorted.begin(), sorted.end());

  Eigen::MatrixXd volumes(m, T);
  ItemList ids;
  for (std::size_t j = 0; j < m; ++j) {
    auto rng = detail::stream(config.seed, 1, j);
    Eigen::VectorXd shape = detail::shape_series(config.process, T, rng);
    const double target = detail::sorted_quantile(sorted, double(j + 1) / double(m + 1));
    volumes.row(j) = (target / shape.sum()) * shape.transpose();
    ids.push_back(detail::numbered_id('C', j + 1, m));
  }
  return {std::move(ids), items.axis(), std::move(volumes)};
}

inline SimulatedStudy simulate(const SimulationConfig& config) {
  auto items = simulate_latent(config);
  auto comparators = simulate_comparators(config, items);
  return {std::move(items), std::move(comparators)};
}

/// Max-normalizes both series jointly to 100 and rounds half away from zero.
inline std::pair<std::vector<int>, std::vector<int>> quantize_pair(std::span<const double> v_i,
                                                                   std::span<const double> v_j) {
  if (v_i.size() != v_j.size()) throw InvalidInput("quantize_pair: series lengths differ");
  double peak = 0.0;
  for (double v : v_i) peak = std::max(peak, v);
  for (double v : v_j) peak = std::max(peak, v);
  if (!(peak > 0)) throw InvalidInput("quantize_pair: both series are all zero");
  auto scale = [peak](std::span<const double> v) {
    std::vector<int> out(v.size());
    for (std::size_t t = 0; t < v.size(); ++t) {
      out[t] = static_cast<int>(std::round(100.0 * v[t] / peak));
    }
    return out;
  };
  return {scale(v_i), scale(v_j)};
}

namespace detail {

inline std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

inline void require_compatible(const LatentVolumePanel& items, const LatentVolumePanel& comparators) {
  if (!(items.axis() == comparators.axis())) {
    throw InvalidInput("items and comparators are on different time axes");
  }
  for (const auto& i : items.items()) {
    for (const auto& j : comparators.items()) {
      if (i == j) throw InvalidInput("identity pair: '" + i + "' compared with itself");
    }
  }
}

}  // namespace detail

/// Runs one independent quantized search per (item, comparator) pair.
inline ComparisonTensor build_comparison_tensor(const LatentVolumePanel& items,
                                                const LatentVolumePanel& comparators) {
  detail::require_compatible(items, comparators);
  const std::size_t n = items.n_items(), m = comparators.n_items(), T = items.n_periods();
  std::vector<int> plus(n * m * T), minus(n * m * T);
  std::vector<std::uint8_t> missing(n * m * T, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto vi = detail::row_vector(items.volumes(), static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < m; ++j) {
      const auto vj = detail::row_vector(comparators.volumes(), static_cast<Eigen::Index>(j));
      auto [pi, pj] = quantize_pair(vi, vj);
      const std::size_t base = (i * m + j) * T;
      std::copy(pi.begin(), pi.end(), plus.begin() + static_cast<std::ptrdiff_t>(base));
      std::copy(pj.begin(), pj.end(), minus.begin() + static_cast<std::ptrdiff_t>(base));
    }
  }
  return {items.items(), comparators.items(), items.axis(), std::move(plus), std::move(minus),
          std::move(missing)};
}

/// S+ / S- computed from the un-rounded normalized scores, i.e. the
/// quantization-free limit of sum_tensor(build_comparison_tensor(...)).
inline SummedComparisonMatrices continuous_sums(const LatentVolumePanel& items,
                                                const LatentVolumePanel& comparators) {
  detail::require_compatible(items, comparators);
  const auto n = static_cast<Eigen::Index>(items.n_items());
  const auto m = static_cast<Eigen::Index>(comparators.n_items());
  SummedComparisonMatrices s{Eigen::MatrixXd(n, m), Eigen::MatrixXd(n, m)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double peak =
          std::max(items.volumes().row(i).maxCoeff(), comparators.volumes().row(j).maxCoeff());
      s.s_plus(i, j) = 100.0 * items.volumes().row(i).sum() / peak;
      s.s_minus(i, j) = 100.0 * comparators.volumes().row(j).sum() / peak;
    }
  }
  return s;
}

/// Interval for the true ratio v1/v2 given scores p1, p2 rounded to the nearest integer.
inline RatioBounds ratio_bounds(int p1, int p2) {
  if (p1 < 1 || p1 > 100 || p2 < 1 || p2 > 100) {
    throw InvalidInput("ratio_bounds: scores must lie in [1, 100], got (" + std::to_string(p1) +
                       ", " + std::to_string(p2) + ")");
  }
  return {(p1 - 0.5) / (p2 + 0.5), (p1 + 0.5) / (p2 - 0.5)};
}

/// Target driven by the first `drivers` items:
///   y[t] = intercept + ar * y[t-1] + loading * z[t] + noise_sigma * e[t],
/// where z is the standardized mean log volume of the drivers.
struct TargetProcess {
  double intercept = 50.0;
  double ar = 0.5;
  double loading = 10.0;
  double noise_sigma = 1.0;
  std::size_t drivers = 5;
};

inline Eigen::VectorXd simulate_target(const LatentVolumePanel& items, std::uint64_t seed,
                                       const TargetProcess& p = {}) {
  if (p.drivers < 1 || p.drivers > items.n_items()) throw InvalidInput("simulate_target: bad driver count");
  if (!(std::abs(p.ar) < 1)) throw InvalidInput("simulate_target: |ar| must be below 1");
  const auto T = static_cast<Eigen::Index>(items.n_periods());
  const auto k = static_cast<Eigen::Index>(p.drivers);
  Eigen::VectorXd z = items.volumes().topRows(k).array().log().colwise().mean().transpose();
  z.array() -= z.mean();
  const double sd = std::sqrt(z.squaredNorm() / static_cast<double>(T));
  if (sd > 0) z /= sd;
  auto rng = detail::stream(seed, 2, 0);
  std::normal_distribution<double> e(0.0, 1.0);
  Eigen::VectorXd y(T);
  double prev = p.intercept / (1 - p.ar);
  for (Eigen::Index t = 0; t < T; ++t) {
    y[t] = p.intercept + p.ar * prev + p.loading * z[t] + p.noise_sigma * e(rng);
    prev = y[t];
  }
  return y;
}

}  // namespace trendagg
