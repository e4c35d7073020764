#pragma once

// Series-level tools: Euclidean and AR-coefficient (Piccolo) distances,
// conditional least squares AR fitting, differencing and the augmented
// Dickey-Fuller test.

#include "trendagg/core.hpp"
#include "trendagg/nowcast/ols.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace trendagg::ts {

/// Symmetric, zero-diagonal matrix of finite nonnegative distances.
class DistanceMatrix {
 public:
  DistanceMatrix(ItemList labels, Eigen::MatrixXd d) : labels_(std::move(labels)), d_(std::move(d)) {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    if (d_.rows() != n || d_.cols() != n) throw InvalidInput("distance matrix shape does not match labels");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d_(i, i) != 0) throw InvalidInput("distance matrix has a nonzero diagonal at " + labels_[i]);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!std::isfinite(d_(i, j)) || d_(i, j) < 0) {
          throw InvalidInput("distance matrix entry is negative or not finite");
        }
        if (d_(i, j) != d_(j, i)) throw InvalidInput("distance matrix is not symmetric");
      }
    }
  }

  const ItemList& labels() const { return labels_; }
  const Eigen::MatrixXd& d() const { return d_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return d_(i, j); }
  std::size_t size() const { return labels_.size(); }

 private:
  ItemList labels_;
  Eigen::MatrixXd d_;
};

struct ARFit {
  std::size_t order = 0;
  double intercept = 0;
  std::vector<double> coefficients;
  double noise_variance = 0;
  /// AIC of the selected order on the common selection sample.
  double aic = 0;
};

struct AdfResult {
  double statistic = 0;
  double critical_value_5pct = 0;
  std::size_t lags = 0;
  std::size_t n_obs = 0;
  /// Unit root rejected at the 5% level (series looks stationary).
  bool reject = false;
};

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("euclidean_distance: series lengths differ");
  double s = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (std::isnan(x[t]) || std::isnan(y[t])) throw InvalidInput("euclidean_distance: missing value");
    const double diff = x[t] - y[t];
    s += diff * diff;
  }
  return std::sqrt(s);
}

/// out[t] = x[t + 1] - x[t].
inline std::vector<double> difference(std::span<const double> x) {
  if (x.size() < 2) throw InvalidInput("difference: need at least 2 values");
  std::vector<double> out(x.size() - 1);
  for (std::size_t t = 0; t + 1 < x.size(); ++t) out[t] = x[t + 1] - x[t];
  return out;
}

inline std::size_t default_max_order(std::size_t T) { return std::min<std::size_t>(10, T / 5); }

namespace detail {

/// Rows t in [first, T) of [1, x[t-1], ..., x[t-p]] and targets x[t].
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> lag_regression(std::span<const double> x,
                                                                  std::size_t p, std::size_t first) {
  const auto rows = static_cast<Eigen::Index>(x.size() - first);
  Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = first + static_cast<std::size_t>(r);
    X(r, 0) = 1.0;
    for (std::size_t l = 1; l <= p; ++l) X(r, static_cast<Eigen::Index>(l)) = x[t - l];
    y[r] = x[t];
  }
  return {std::move(X), std::move(y)};
}

}  // namespace detail

/// AR(p) by conditional least squares for p = 0..max_order on a common sample;
/// the AIC-minimizing order is refit on all usable rows.
inline ARFit ar_fit(std::span<const double> x, std::size_t max_order) {
  if (x.size() < std::max<std::size_t>(4 * max_order, 3)) {
    throw InvalidInput("ar_fit: series of length " + std::to_string(x.size()) +
                       " too short for max order " + std::to_string(max_order));
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw InvalidInput("ar_fit: constant series");

  std::size_t best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p <= max_order; ++p) {
    const auto [X, y] = detail::lag_regression(x, p, max_order);
    const auto fit = nowcast::ols_fit_dropping_aliased(X, y);
    const double a = nowcast::aic(fit.n_parameters(), fit.log_likelihood);
    if (a < best_aic) {
      best_aic = a;
      best_p = p;
    }
  }
  const auto [X, y] = detail::lag_regression(x, best_p, best_p);
  const auto fit = nowcast::ols_fit_dropping_aliased(X, y);
  ARFit out;
  out.order = best_p;
  out.intercept = fit.coefficients[0];
  for (std::size_t l = 1; l <= best_p; ++l) out.coefficients.push_back(fit.coefficients[static_cast<Eigen::Index>(l)]);
  out.noise_variance = fit.sigma2;
  out.aic = best_aic;
  return out;
}

inline ARFit ar_fit(std::span<const double> x) { return ar_fit(x, default_max_order(x.size())); }

/// Euclidean distance between AR coefficient vectors, zero-padding the shorter.
inline double piccolo_distance(const ARFit& fx, const ARFit& fy) {
  const std::size_t len = std::max(fx.coefficients.size(), fy.coefficients.size());
  double s = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = i < fx.coefficients.size() ? fx.coefficients[i] : 0.0;
    const double b = i < fy.coefficients.size() ? fy.coefficients[i] : 0.0;
    s += (a - b) * (a - b);
  }
  return std::sqrt(s);
}

/// 5% critical values of the Dickey-Fuller tau statistic, constant and no
/// trend (Fuller 1976, Table 8.5.2), by sample size.
inline constexpr std::array<std::pair<double, double>, 5> kAdfCritical5{{
    {25, -3.00}, {50, -2.93}, {100, -2.89}, {250, -2.88}, {500, -2.87}}};
inline constexpr double kAdfCritical5Asymptotic = -2.86;

/// Linear interpolation in T; beyond 500 interpolates in 1/T to the asymptotic value.
inline double adf_critical_value_5pct(std::size_t n) {
  const double T = static_cast<double>(n);
  if (T <= kAdfCritical5.front().first) return kAdfCritical5.front().second;
  for (std::size_t k = 1; k < kAdfCritical5.size(); ++k) {
    const auto [t1, c1] = kAdfCritical5[k];
    if (T <= t1) {
      const auto [t0, c0] = kAdfCritical5[k - 1];
      return c0 + (T - t0) / (t1 - t0) * (c1 - c0);
    }
  }
  const auto [tl, cl] = kAdfCritical5.back();
  return kAdfCritical5Asymptotic + (cl - kAdfCritical5Asymptotic) * (tl / T);
}

/// Schwert rule floor(12 (T/100)^(1/4)), capped at T/4.
inline std::size_t adf_lag_order(std::size_t T) {
  const auto schwert = static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(T) / 100.0, 0.25)));
  return std::min(schwert, T / 4);
}

/// Regression dx[t] = a + g x[t-1] + sum_i d_i dx[t-i] + e; the statistic is g / se(g).
inline AdfResult adf_test(std::span<const double> x) {
  if (x.size() < 20) throw InvalidInput("adf_test: need at least 20 observations");
  const std::size_t T = x.size();
  const std::size_t p = adf_lag_order(T);
  const auto dx = difference(x);  // dx[s] = x[s+1] - x[s]
  // Regression rows: dx[s] for s = p .. T-2, regressors x[s], dx[s-1..s-p].
  const auto rows = static_cast<Eigen::Index>(dx.size() - p);
  const auto cols = static_cast<Eigen::Index>(p + 2);
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t s = p + static_cast<std::size_t>(r);
    X(r, 0) = 1.0;
    X(r, 1) = x[s];
    for (std::size_t l = 1; l <= p; ++l) X(r, static_cast<Eigen::Index>(l + 1)) = dx[s - l];
    y[r] = dx[s];
  }
  const auto fit = nowcast::ols_fit(X, y);
  const double s2 = fit.sse / static_cast<double>(rows - cols);
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  AdfResult out;
  out.statistic = fit.coefficients[1] / std::sqrt(s2 * xtx_inv(1, 1));
  out.lags = p;
  out.n_obs = static_cast<std::size_t>(rows);
  out.critical_value_5pct = adf_critical_value_5pct(out.n_obs);
  out.reject = out.statistic < out.critical_value_5pct;
  return out;
}

// ---------------------------------------------------------------------------
// Distance matrices over panel rows
// ---------------------------------------------------------------------------

inline std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

inline DistanceMatrix euclidean_distances(const ItemList& labels, const Eigen::MatrixXd& series) {
  const Eigen::Index n = series.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = row_of(series, i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = euclidean_distance(xi, row_of(series, j));
    }
  }
  return {labels, std::move(d)};
}

inline DistanceMatrix piccolo_distances(const ItemList& labels, const std::vector<ARFit>& fits) {
  const auto n = static_cast<Eigen::Index>(fits.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = piccolo_distance(fits[static_cast<std::size_t>(i)], fits[static_cast<std::size_t>(j)]);
    }
  }
  return {labels, std::move(d)};
}

/// Natural log with nonpositive values floored at the smallest positive value in the block.
inline Eigen::MatrixXd log_with_floor(const Eigen::MatrixXd& values) {
  double floor_value = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (v > 0) floor_value = std::min(floor_value, v);
  }
  if (!std::isfinite(floor_value)) throw InvalidInput("log transform: no positive values");
  return values.unaryExpr([floor_value](double v) { return std::log(std::max(v, floor_value)); });
}

}  // namespace trendagg::ts
