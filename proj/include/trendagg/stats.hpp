#pragma once

// Correlation battery: Pearson with Fisher-z p-values, lagged cross
// correlations, first-order partial correlations, and the two-sided binomial
// sign test.

#include "trendagg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace trendagg::stats {

struct CorrelationResult {
  double r = 0;
  std::size_t n = 0;
  /// Two-sided, from the normal approximation to atanh(r).
  double p_value = 1;
};

struct SignTestResult {
  std::size_t k = 0;
  std::size_t n = 0;
  double p_value = 1;
};

/// Two-sided p-value of z = atanh(r) * sqrt(dof).
inline double fisher_p_value(double r, double dof) {
  if (!(dof > 0)) throw InvalidInput("fisher_p_value: non-positive degrees of freedom");
  if (std::abs(r) >= 1) return 0.0;
  const double z = std::atanh(r) * std::sqrt(dof);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

namespace detail {

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double product_moment(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx, dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw InvalidInput("correlation: constant input series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace detail

inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("pearson: series lengths differ");
  if (x.size() < 4) throw InvalidInput("pearson: need at least 4 observations");
  const double r = detail::product_moment(x, y);
  return {r, x.size(), fisher_p_value(r, static_cast<double>(x.size()) - 3.0)};
}

/// Correlates x[t + lag] with y[t] over the overlap. With x = search volume
/// and y = price, a positive lag means search volume lags the price.
inline CorrelationResult cross_correlation(std::span<const double> x, std::span<const double> y,
                                           int lag) {
  if (x.size() != y.size()) throw InvalidInput("cross_correlation: series lengths differ");
  const auto T = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t first = std::max<std::ptrdiff_t>(0, -lag);
  const std::ptrdiff_t last = std::min<std::ptrdiff_t>(T, T - lag);  // exclusive, on y's index
  if (last - first < 4) {
    throw InvalidInput("cross_correlation: overlap at lag " + std::to_string(lag) +
                       " is shorter than 4 points");
  }
  return pearson(x.subspan(static_cast<std::size_t>(first + lag), static_cast<std::size_t>(last - first)),
                 y.subspan(static_cast<std::size_t>(first), static_cast<std::size_t>(last - first)));
}

/// r_{xy|z}; the p-value uses n - 4 in the Fisher transform (one control variable).
inline CorrelationResult partial_correlation(std::span<const double> x, std::span<const double> y,
                                             std::span<const double> z) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw InvalidInput("partial_correlation: series lengths differ");
  }
  if (x.size() < 5) throw InvalidInput("partial_correlation: need at least 5 observations");
  const double rxy = detail::product_moment(x, y);
  const double rxz = detail::product_moment(x, z);
  const double ryz = detail::product_moment(y, z);
  const double denom = (1 - rxz * rxz) * (1 - ryz * ryz);
  if (!(denom > 0)) throw InvalidInput("partial_correlation: control is perfectly correlated");
  const double r = std::clamp((rxy - rxz * ryz) / std::sqrt(denom), -1.0, 1.0);
  return {r, x.size(), fisher_p_value(r, static_cast<double>(x.size()) - 4.0)};
}

/// Exact two-sided binomial tail for k successes out of n at p = 1/2.
inline SignTestResult sign_binomial_test(std::size_t k, std::size_t n) {
  if (k > n) throw InvalidInput("sign_binomial_test: k exceeds n");
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  auto pmf = [&](std::size_t x) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) +
                    log_half_n);
  };
  double tail = 0;
  if (2 * k <= n) {
    for (std::size_t x = 0; x <= k; ++x) tail += pmf(x);
  } else {
    for (std::size_t x = k; x <= n; ++x) tail += pmf(x);
  }
  return {k, n, std::min(1.0, 2.0 * tail)};
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> out(x.size());
  for (std::size_t lo = 0; lo < idx.size();) {
    std::size_t hi = lo;
    while (hi + 1 < idx.size() && x[idx[hi + 1]] == x[idx[lo]]) ++hi;
    const double r = 0.5 * static_cast<double>(lo + hi) + 1.0;
    for (std::size_t q = lo; q <= hi; ++q) out[idx[q]] = r;
    lo = hi + 1;
  }
  return out;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("spearman: series lengths differ");
  const auto rx = ranks(x), ry = ranks(y);
  return detail::product_moment(rx, ry);
}

}  // namespace trendagg::stats
