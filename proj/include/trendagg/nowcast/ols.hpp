#pragma once

#include "trendagg/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace trendagg::nowcast {

class RankDeficient : public Error {
 public:
  RankDeficient(const std::string& msg, std::vector<std::size_t> columns)
      : Error(msg), columns_(std::move(columns)) {}
  const std::vector<std::size_t>& columns() const { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

struct OlsFit {
  /// One entry per design column; aliased columns (when dropped) hold 0.
  Eigen::VectorXd coefficients;
  Eigen::VectorXd fitted;
  double sse = 0;
  /// ML variance estimate SSE / n.
  double sigma2 = 0;
  double log_likelihood = 0;
  std::size_t n_obs = 0;
  /// Columns dropped as linear combinations of earlier columns.
  std::vector<std::size_t> aliased;

  /// Regression coefficients plus the variance.
  std::size_t n_parameters() const { return coefficients.size() - aliased.size() + 1; }
};

inline constexpr double kAliasTolerance = 1e-9;

/// Columns that are (numerically) linear combinations of earlier columns,
/// found by in-order modified Gram-Schmidt with re-orthogonalization.
inline std::vector<std::size_t> aliased_columns(const Eigen::MatrixXd& X,
                                                double tol = kAliasTolerance) {
  std::vector<std::size_t> aliased;
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    Eigen::VectorXd w = X.col(c);
    const double norm0 = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) w -= q.dot(w) * q;
    }
    const double norm = w.norm();
    if (norm0 == 0 || norm <= tol * norm0) {
      aliased.push_back(static_cast<std::size_t>(c));
    } else {
      basis.push_back(w / norm);
    }
  }
  return aliased;
}

/// Gaussian log-likelihood at the ML variance SSE / n; +inf for a perfect fit.
inline double gaussian_log_likelihood(double sse, std::size_t n) {
  if (!(sse > 0)) return std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return -0.5 * nn * (std::log(2.0 * std::numbers::pi * sse / nn) + 1.0);
}

/// Akaike information criterion 2k - 2 log L.
inline double aic(std::size_t k, double log_likelihood) {
  if (k < 1) throw InvalidInput("aic: parameter count must be >= 1");
  return 2.0 * static_cast<double>(k) - 2.0 * log_likelihood;
}

namespace detail {

inline OlsFit solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::vector<std::size_t> aliased) {
  std::vector<Eigen::Index> kept;
  for (Eigen::Index c = 0, a = 0; c < X.cols(); ++c) {
    if (a < static_cast<Eigen::Index>(aliased.size()) && aliased[static_cast<std::size_t>(a)] == static_cast<std::size_t>(c)) {
      ++a;
    } else {
      kept.push_back(c);
    }
  }
  Eigen::MatrixXd Xk(X.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) Xk.col(static_cast<Eigen::Index>(k)) = X.col(kept[k]);

  OlsFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(X.cols());
  if (!kept.empty()) {
    const Eigen::VectorXd b = Xk.householderQr().solve(y);
    for (std::size_t k = 0; k < kept.size(); ++k) fit.coefficients[kept[k]] = b[static_cast<Eigen::Index>(k)];
  }
  fit.fitted = X * fit.coefficients;
  fit.sse = (y - fit.fitted).squaredNorm();
  fit.n_obs = static_cast<std::size_t>(y.size());
  fit.sigma2 = fit.sse / static_cast<double>(fit.n_obs);
  fit.log_likelihood = gaussian_log_likelihood(fit.sse, fit.n_obs);
  fit.aliased = std::move(aliased);
  return fit;
}

inline std::string describe_columns(const std::vector<std::size_t>& cols,
                                    std::span<const std::string> names) {
  std::string out;
  for (auto c : cols) {
    if (!out.empty()) out += ", ";
    out += c < names.size() ? names[c] : "column " + std::to_string(c);
  }
  return out;
}

}  // namespace detail

/// Least squares with a full-rank requirement. `names` labels columns in errors.
inline OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      std::span<const std::string> names = {}) {
  if (X.rows() != y.size()) throw InvalidInput("ols_fit: design and target row counts differ");
  if (X.rows() < X.cols()) {
    throw InvalidInput("ols_fit: " + std::to_string(X.rows()) + " rows for " +
                       std::to_string(X.cols()) + " columns");
  }
  auto aliased = aliased_columns(X);
  if (!aliased.empty()) {
    throw RankDeficient("ols_fit: rank-deficient design, aliased columns: " +
                            detail::describe_columns(aliased, names),
                        aliased);
  }
  return detail::solve_least_squares(X, y, {});
}

/// Least squares that drops aliased columns in column order and zeroes their
/// coefficients; usable with more columns than rows.
inline OlsFit ols_fit_dropping_aliased(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw InvalidInput("ols_fit: design and target row counts differ");
  return detail::solve_least_squares(X, y, aliased_columns(X));
}

/// 100/n * sum |y - yhat| / |y|.
inline double mape(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw InvalidInput("mape: lengths differ");
  if (y.empty()) throw InvalidInput("mape: empty input");
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) throw InvalidInput("mape: actual value is zero at position " + std::to_string(i));
    total += std::abs((y[i] - yhat[i]) / y[i]);
  }
  return 100.0 * total / static_cast<double>(y.size());
}

}  // namespace trendagg::nowcast
