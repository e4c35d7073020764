#pragma once

#include "trendagg/nowcast/ols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace trendagg::nowcast {

enum class ModelFamily { kBase, kFull, kForwardStepwise, kLasso, kPca };

struct ModelKind {
  ModelFamily family = ModelFamily::kBase;
  /// Component count for kPca.
  int components = 0;

  static ModelKind base() { return {ModelFamily::kBase, 0}; }
  static ModelKind full() { return {ModelFamily::kFull, 0}; }
  static ModelKind forward() { return {ModelFamily::kForwardStepwise, 0}; }
  static ModelKind lasso() { return {ModelFamily::kLasso, 0}; }
  static ModelKind pca(int k) { return {ModelFamily::kPca, k}; }

  std::string name() const {
    switch (family) {
      case ModelFamily::kBase: return "base";
      case ModelFamily::kFull: return "full";
      case ModelFamily::kForwardStepwise: return "fwd";
      case ModelFamily::kLasso: return "lasso";
      case ModelFamily::kPca: return "pca" + std::to_string(components);
    }
    return "unknown";
  }

  static ModelKind parse(const std::string& text) {
    if (text == "base") return base();
    if (text == "full" || text == "all") return full();
    if (text == "fwd" || text == "stepwise" || text == "forward") return forward();
    if (text == "lasso") return lasso();
    if (text.rfind("pca", 0) == 0 && text.size() > 3) {
      int k = 0;
      for (char c : text.substr(3)) {
        if (c < '0' || c > '9') throw InvalidInput("unknown model kind '" + text + "'");
        k = k * 10 + (c - '0');
      }
      if (k < 1) throw InvalidInput("pca model needs at least one component");
      return pca(k);
    }
    throw InvalidInput("unknown model kind '" + text + "'");
  }

  friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

/// A design matrix: intercept, lag columns, then predictor columns.
struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  /// Intercept plus lag columns; always in the model.
  std::size_t n_base = 2;

  std::size_t n_predictors() const { return static_cast<std::size_t>(X.cols()) - n_base; }

  DesignMatrix rows(Eigen::Index first, Eigen::Index count) const {
    return {X.middleRows(first, count), names, n_base};
  }
};

struct PcaResult {
  Eigen::VectorXd centers;
  /// n x k, columns are unit eigenvectors in descending eigenvalue order.
  Eigen::MatrixXd loadings;
  /// All eigenvalues of the covariance matrix, descending.
  Eigen::VectorXd eigenvalues;
  /// rows x k projections of the centered data.
  Eigen::MatrixXd scores;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& G) const {
    return (G.rowwise() - centers.transpose()) * loadings;
  }
};

struct NowcastModelFit {
  ModelKind kind;
  std::vector<std::string> column_names;
  /// Over design columns. For PCA fits only the base entries are used.
  Eigen::VectorXd beta;
  /// Design columns in the model (base columns first).
  std::vector<std::size_t> selected;
  std::size_t n_base = 0;

  double aic = std::numeric_limits<double>::quiet_NaN();
  double sse = 0;

  double lambda = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lambda_grid;
  std::vector<double> cv_error;

  PcaResult pca;
  Eigen::VectorXd component_beta;

  /// Set when the training target was constant and an intercept-only fit was used.
  bool degenerate = false;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = X * beta;
    if (component_beta.size() > 0) {
      const auto n_pred = X.cols() - static_cast<Eigen::Index>(n_base);
      out += pca.transform(X.rightCols(n_pred)) * component_beta;
    }
    return out;
  }
};

namespace detail {

inline NowcastModelFit from_ols(ModelKind kind, const DesignMatrix& d,
                                const std::vector<std::size_t>& cols, const OlsFit& ols) {
  NowcastModelFit fit;
  fit.kind = kind;
  fit.column_names = d.names;
  fit.n_base = d.n_base;
  fit.beta = Eigen::VectorXd::Zero(d.X.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    fit.beta[static_cast<Eigen::Index>(cols[k])] = ols.coefficients[static_cast<Eigen::Index>(k)];
  }
  std::vector<bool> dropped(cols.size(), false);
  for (auto a : ols.aliased) dropped[a] = true;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (!dropped[k]) fit.selected.push_back(cols[k]);
  }
  fit.sse = ols.sse;
  fit.aic = aic(ols.n_parameters(), ols.log_likelihood);
  return fit;
}

inline Eigen::MatrixXd columns(const Eigen::MatrixXd& X, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

inline std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

inline bool is_constant(const Eigen::VectorXd& y) {
  return y.size() == 0 || (y.array() == y[0]).all();
}

}  // namespace detail

/// Ordinary least squares on the base columns only.
inline NowcastModelFit fit_base(const DesignMatrix& d, const Eigen::VectorXd& y) {
  const auto cols = detail::first_n(d.n_base);
  const Eigen::MatrixXd Xb = detail::columns(d.X, cols);
  return detail::from_ols(ModelKind::base(), d, cols, ols_fit(Xb, y, d.names));
}

/// All columns; columns aliased with earlier ones are dropped (needed when
/// predictors outnumber training rows).
inline NowcastModelFit fit_full(const DesignMatrix& d, const Eigen::VectorXd& y) {
  const auto cols = detail::first_n(static_cast<std::size_t>(d.X.cols()));
  return detail::from_ols(ModelKind::full(), d, cols, ols_fit_dropping_aliased(d.X, y));
}

/// Forward selection by AIC starting from the base columns. Each step adds the
/// predictor giving the lowest AIC; stops when no addition lowers it.
/// Candidates aliased with the current design are skipped.
inline NowcastModelFit forward_stepwise(const DesignMatrix& d, const Eigen::VectorXd& y) {
  const Eigen::Index rows = d.X.rows();
  std::vector<std::size_t> chosen = detail::first_n(d.n_base);
  {
    const Eigen::MatrixXd Xb = detail::columns(d.X, chosen);
    if (!aliased_columns(Xb).empty()) ols_fit(Xb, y, d.names);  // throws with names
  }

  // Orthonormal basis of the current design, and candidates residualized against it.
  std::vector<Eigen::VectorXd> basis;
  auto orthogonalize = [&](Eigen::VectorXd w) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) w -= q.dot(w) * q;
    }
    return w;
  };
  for (auto c : chosen) {
    Eigen::VectorXd w = orthogonalize(d.X.col(static_cast<Eigen::Index>(c)));
    basis.push_back(w / w.norm());
  }
  Eigen::VectorXd resid = orthogonalize(y);

  std::vector<std::size_t> candidates;
  for (auto c = d.n_base; c < static_cast<std::size_t>(d.X.cols()); ++c) candidates.push_back(c);
  std::vector<Eigen::VectorXd> w(candidates.size());
  std::vector<double> norm0(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Eigen::VectorXd col = d.X.col(static_cast<Eigen::Index>(candidates[k]));
    norm0[k] = col.norm();
    w[k] = orthogonalize(col);
  }
  std::vector<bool> used(candidates.size(), false);

  double current_aic = aic(chosen.size() + 1, gaussian_log_likelihood(resid.squaredNorm(), static_cast<std::size_t>(rows)));
  while (static_cast<Eigen::Index>(chosen.size()) < rows && std::isfinite(current_aic)) {
    std::ptrdiff_t best = -1;
    double best_aic = current_aic;
    const double sse = resid.squaredNorm();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (used[k]) continue;
      const double wn = w[k].norm();
      if (norm0[k] == 0 || wn <= kAliasTolerance * norm0[k]) continue;
      const double proj = w[k].dot(resid) / wn;
      const double sse_new = std::max(0.0, sse - proj * proj);
      const double a = aic(chosen.size() + 2, gaussian_log_likelihood(sse_new, static_cast<std::size_t>(rows)));
      if (a < best_aic) {
        best_aic = a;
        best = static_cast<std::ptrdiff_t>(k);
      }
    }
    if (best < 0) break;
    const auto kb = static_cast<std::size_t>(best);
    used[kb] = true;
    chosen.push_back(candidates[kb]);
    Eigen::VectorXd q = orthogonalize(w[kb]);
    q /= q.norm();
    basis.push_back(q);
    resid -= q.dot(resid) * q;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (!used[k]) w[k] -= q.dot(w[k]) * q;
    }
    current_aic = best_aic;
  }

  std::sort(chosen.begin() + static_cast<std::ptrdiff_t>(d.n_base), chosen.end());
  const Eigen::MatrixXd Xs = detail::columns(d.X, chosen);
  return detail::from_ols(ModelKind::forward(), d, chosen, ols_fit(Xs, y, d.names));
}

// ---------------------------------------------------------------------------
// Lasso
// ---------------------------------------------------------------------------

struct LassoOptions {
  std::size_t folds = 10;
  std::size_t grid_size = 100;
  double min_ratio = 1e-4;
  /// Penalize lag columns like the predictors (only the intercept is free).
  bool penalize_lags = true;
  /// A sweep converges when max_j n * (change in b_j)^2 falls below
  /// tolerance * (centered target sum of squares).
  double tolerance = 1e-7;
  std::size_t max_passes = 100000;
};

/// Coefficients of SSE + lambda * sum |b_j| over standardized columns,
/// reported on the original scale.
struct LassoSolution {
  double lambda = 0;
  double intercept = 0;
  /// Over design columns; entry 0 (intercept column) is zero, see `intercept`.
  Eigen::VectorXd beta;
};

namespace detail {

/// Centers/standardizes all columns except the intercept (column 0).
struct Standardized {
  Eigen::MatrixXd Z;
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 for constant columns
  double y_mean = 0;
  Eigen::VectorXd yc;
};

inline Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Standardized s;
  const auto n = static_cast<double>(X.rows());
  s.Z = Eigen::MatrixXd::Zero(X.rows(), X.cols());
  s.mean = Eigen::VectorXd::Zero(X.cols());
  s.scale = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index c = 1; c < X.cols(); ++c) {
    s.mean[c] = X.col(c).mean();
    const Eigen::VectorXd centered = X.col(c).array() - s.mean[c];
    const double sd = std::sqrt(centered.squaredNorm() / n);
    if (sd > 1e-12 * (std::abs(s.mean[c]) + 1.0)) {
      s.scale[c] = sd;
      s.Z.col(c) = centered / sd;
    }
  }
  s.y_mean = y.mean();
  s.yc = y.array() - s.y_mean;
  return s;
}

/// Coordinate descent along `lambdas` with warm starts. Returns standardized
/// coefficients per lambda.
inline std::vector<Eigen::VectorXd> coordinate_descent_path(const Standardized& s,
                                                            const std::vector<bool>& penalized,
                                                            const std::vector<double>& lambdas,
                                                            const LassoOptions& opt) {
  const Eigen::Index p = s.Z.cols();
  const auto n = static_cast<double>(s.Z.rows());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = s.yc;
  std::vector<Eigen::VectorXd> path;
  path.reserve(lambdas.size());

  auto update = [&](Eigen::Index c, double lambda) {
    if (s.scale[c] == 0) return 0.0;
    const double old = b[c];
    const double rho = s.Z.col(c).dot(r) + n * old;
    double next = rho / n;
    if (penalized[static_cast<std::size_t>(c)]) {
      const double half = 0.5 * lambda;
      next = rho > half ? (rho - half) / n : (rho < -half ? (rho + half) / n : 0.0);
    }
    if (next != old) {
      r -= (next - old) * s.Z.col(c);
      b[c] = next;
    }
    return n * (next - old) * (next - old);
  };
  const double threshold = opt.tolerance * std::max(s.yc.squaredNorm(), std::numeric_limits<double>::min());

  for (double lambda : lambdas) {
    for (std::size_t pass = 0; pass < opt.max_passes; ++pass) {
      double delta = 0;
      for (Eigen::Index c = 1; c < p; ++c) delta = std::max(delta, update(c, lambda));
      if (delta < threshold) break;
      // Sweep the active set to convergence before the next full pass.
      for (std::size_t inner = 0; inner < opt.max_passes; ++inner) {
        double d2 = 0;
        for (Eigen::Index c = 1; c < p; ++c) {
          if (b[c] != 0) d2 = std::max(d2, update(c, lambda));
        }
        if (d2 < threshold) break;
      }
    }
    path.push_back(b);
  }
  return path;
}

inline LassoSolution to_original_scale(const Standardized& s, const Eigen::VectorXd& b, double lambda) {
  LassoSolution sol;
  sol.lambda = lambda;
  sol.beta = Eigen::VectorXd::Zero(b.size());
  sol.intercept = s.y_mean;
  for (Eigen::Index c = 1; c < b.size(); ++c) {
    if (s.scale[c] == 0) continue;
    sol.beta[c] = b[c] / s.scale[c];
    sol.intercept -= sol.beta[c] * s.mean[c];
  }
  return sol;
}

inline std::vector<bool> penalty_mask(const DesignMatrix& d, bool penalize_lags) {
  std::vector<bool> mask(static_cast<std::size_t>(d.X.cols()), true);
  mask[0] = false;
  if (!penalize_lags) {
    for (std::size_t c = 1; c < d.n_base; ++c) mask[c] = false;
  }
  return mask;
}

/// Smallest lambda with every penalized coefficient at zero.
inline double lambda_max(const Standardized& s, const std::vector<bool>& penalized,
                         const LassoOptions& opt) {
  // Residual after fitting the unpenalized columns alone.
  const auto path = coordinate_descent_path(s, penalized, {std::numeric_limits<double>::infinity()}, opt);
  const Eigen::VectorXd r = s.yc - s.Z * path.front();
  double out = 0;
  for (Eigen::Index c = 1; c < s.Z.cols(); ++c) {
    if (penalized[static_cast<std::size_t>(c)] && s.scale[c] > 0) {
      out = std::max(out, 2.0 * std::abs(s.Z.col(c).dot(r)));
    }
  }
  return out;
}

}  // namespace detail

/// Lasso solutions for each lambda (standardized internally, warm-started).
inline std::vector<LassoSolution> lasso_path(const DesignMatrix& d, const Eigen::VectorXd& y,
                                             const std::vector<double>& lambdas,
                                             const LassoOptions& opt = {}) {
  if (d.X.rows() != y.size()) throw InvalidInput("lasso: design and target row counts differ");
  const auto s = detail::standardize(d.X, y);
  const auto mask = detail::penalty_mask(d, opt.penalize_lags);
  const auto path = detail::coordinate_descent_path(s, mask, lambdas, opt);
  std::vector<LassoSolution> out;
  for (std::size_t k = 0; k < lambdas.size(); ++k) out.push_back(detail::to_original_scale(s, path[k], lambdas[k]));
  return out;
}

/// The default grid: `grid_size` log-spaced values from lambda_max down to lambda_max * min_ratio.
inline std::vector<double> lasso_grid(const DesignMatrix& d, const Eigen::VectorXd& y,
                                      const LassoOptions& opt = {}) {
  const auto s = detail::standardize(d.X, y);
  const double top = detail::lambda_max(s, detail::penalty_mask(d, opt.penalize_lags), opt);
  std::vector<double> grid;
  if (!(top > 0)) return {0.0};
  const double step = std::log(opt.min_ratio) / static_cast<double>(std::max<std::size_t>(1, opt.grid_size - 1));
  for (std::size_t k = 0; k < opt.grid_size; ++k) grid.push_back(top * std::exp(step * static_cast<double>(k)));
  return grid;
}

/// Lasso with lambda chosen by contiguous-block K-fold cross validation
/// (minimum mean held-out squared error; ties keep the larger lambda), then
/// refit on all rows.
inline NowcastModelFit lasso_fit(const DesignMatrix& d, const Eigen::VectorXd& y,
                                 const LassoOptions& opt = {}) {
  const Eigen::Index rows = d.X.rows();
  if (opt.folds < 2) throw InvalidInput("lasso: need at least 2 folds");
  if (rows < static_cast<Eigen::Index>(opt.folds)) {
    throw InvalidInput("lasso: " + std::to_string(rows) + " rows for " + std::to_string(opt.folds) + " folds");
  }
  NowcastModelFit fit;
  fit.kind = ModelKind::lasso();
  fit.column_names = d.names;
  fit.n_base = d.n_base;
  fit.lambda_grid = lasso_grid(d, y, opt);
  fit.cv_error.assign(fit.lambda_grid.size(), 0.0);

  for (std::size_t f = 0; f < opt.folds; ++f) {
    const Eigen::Index lo = static_cast<Eigen::Index>(f) * rows / static_cast<Eigen::Index>(opt.folds);
    const Eigen::Index hi = static_cast<Eigen::Index>(f + 1) * rows / static_cast<Eigen::Index>(opt.folds);
    DesignMatrix train{Eigen::MatrixXd(rows - (hi - lo), d.X.cols()), d.names, d.n_base};
    Eigen::VectorXd ytrain(rows - (hi - lo));
    train.X.topRows(lo) = d.X.topRows(lo);
    train.X.bottomRows(rows - hi) = d.X.bottomRows(rows - hi);
    ytrain.head(lo) = y.head(lo);
    ytrain.tail(rows - hi) = y.tail(rows - hi);
    const auto path = lasso_path(train, ytrain, fit.lambda_grid, opt);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Eigen::VectorXd pred =
          (d.X.middleRows(lo, hi - lo) * path[k].beta).array() + path[k].intercept;
      fit.cv_error[k] += (y.segment(lo, hi - lo) - pred).squaredNorm();
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < fit.cv_error.size(); ++k) {
    fit.cv_error[k] /= static_cast<double>(rows);
    if (fit.cv_error[k] < fit.cv_error[best]) best = k;
  }
  fit.lambda = fit.lambda_grid[best];
  const auto path = lasso_path(d, y, std::vector<double>(fit.lambda_grid.begin(), fit.lambda_grid.begin() + static_cast<std::ptrdiff_t>(best) + 1), opt);
  const auto& sol = path.back();
  fit.beta = sol.beta;
  fit.beta[0] = sol.intercept;  // column 0 is the all-ones intercept column
  for (Eigen::Index c = 0; c < fit.beta.size(); ++c) {
    if (c == 0 || fit.beta[c] != 0) fit.selected.push_back(static_cast<std::size_t>(c));
  }
  fit.sse = (y - d.X * fit.beta).squaredNorm();
  return fit;
}

// ---------------------------------------------------------------------------
// PCA
// ---------------------------------------------------------------------------

/// Covariance PCA of the columns of G, keeping the top-k components. Each
/// loading vector is signed so its largest-magnitude entry is positive.
inline PcaResult pca_components(const Eigen::MatrixXd& G, int k) {
  const Eigen::Index rows = G.rows(), n = G.cols();
  if (rows < 2) throw InvalidInput("pca: need at least 2 rows");
  if (k < 1 || k > std::min(rows, n)) {
    throw InvalidInput("pca: k=" + std::to_string(k) + " outside [1, min(rows, columns)]");
  }
  PcaResult out;
  out.centers = G.colwise().mean().transpose();
  const Eigen::MatrixXd C = G.rowwise() - out.centers.transpose();
  const Eigen::MatrixXd B = (C.transpose() * C) / static_cast<double>(rows - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success) throw Error("pca: eigendecomposition failed");
  out.eigenvalues = eig.eigenvalues().reverse();
  const double top = std::max(out.eigenvalues[0], 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < n; ++i) rank += out.eigenvalues[i] > 1e-10 * top && out.eigenvalues[i] > 0;
  if (k > rank) {
    throw InvalidInput("pca: k=" + std::to_string(k) + " exceeds covariance rank " + std::to_string(rank));
  }
  out.loadings.resize(n, k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.loadings.col(c) = v;
  }
  out.scores = C * out.loadings;
  return out;
}

/// OLS on [base columns | first k component scores of the predictor block].
inline NowcastModelFit pca_regression(const DesignMatrix& d, const Eigen::VectorXd& y, int k) {
  const auto n_pred = static_cast<Eigen::Index>(d.n_predictors());
  if (n_pred < 1) throw InvalidInput("pca_regression: no predictor columns");
  NowcastModelFit fit;
  fit.kind = ModelKind::pca(k);
  fit.column_names = d.names;
  fit.n_base = d.n_base;
  fit.pca = pca_components(d.X.rightCols(n_pred), k);

  const auto nb = static_cast<Eigen::Index>(d.n_base);
  Eigen::MatrixXd Xr(d.X.rows(), nb + k);
  Xr << d.X.leftCols(nb), fit.pca.scores;
  std::vector<std::string> names(d.names.begin(), d.names.begin() + nb);
  for (int c = 0; c < k; ++c) names.push_back("PC" + std::to_string(c + 1));
  const auto ols = ols_fit(Xr, y, names);

  fit.beta = Eigen::VectorXd::Zero(d.X.cols());
  fit.beta.head(nb) = ols.coefficients.head(nb);
  fit.component_beta = ols.coefficients.tail(k);
  fit.selected = detail::first_n(d.n_base);
  fit.sse = ols.sse;
  fit.aic = aic(ols.n_parameters(), ols.log_likelihood);
  return fit;
}

/// Intercept-only fit used when the training target is constant.
inline NowcastModelFit fit_constant(ModelKind kind, const DesignMatrix& d, const Eigen::VectorXd& y) {
  NowcastModelFit fit;
  fit.kind = kind;
  fit.column_names = d.names;
  fit.n_base = d.n_base;
  fit.beta = Eigen::VectorXd::Zero(d.X.cols());
  fit.beta[0] = y.mean();
  fit.selected = {0};
  fit.degenerate = true;
  fit.sse = (y.array() - y.mean()).matrix().squaredNorm();
  return fit;
}

inline NowcastModelFit fit_model(ModelKind kind, const DesignMatrix& d, const Eigen::VectorXd& y,
                                 const LassoOptions& lasso = {}) {
  if (detail::is_constant(y)) return fit_constant(kind, d, y);
  switch (kind.family) {
    case ModelFamily::kBase: return fit_base(d, y);
    case ModelFamily::kFull: return fit_full(d, y);
    case ModelFamily::kForwardStepwise: return forward_stepwise(d, y);
    case ModelFamily::kLasso: return lasso_fit(d, y, lasso);
    case ModelFamily::kPca: return pca_regression(d, y, kind.components);
  }
  throw InvalidInput("unknown model family");
}

}  // namespace trendagg::nowcast
