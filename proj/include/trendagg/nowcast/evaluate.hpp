#pragma once

// Rolling in-sample / one-ahead out-of-sample evaluation.
//
// For each window start t (0-based: 1, or 12 with a seasonal lag, through
// T - P - 1) every model kind is fit on rows [t, t + P - 1] and forecasts row
// t + P. Errors are MAPE on the original scale of the target.

#include "trendagg/nowcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace trendagg::nowcast {

struct TargetSeries {
  std::string name;
  TimeAxis axis;
  Eigen::VectorXd values;
  /// Adds the y[t-12] regressor.
  bool seasonal = false;

  TargetSeries(std::string name_, TimeAxis axis_, Eigen::VectorXd values_, bool seasonal_)
      : name(std::move(name_)), axis(std::move(axis_)), values(std::move(values_)), seasonal(seasonal_) {
    if (values.size() != static_cast<Eigen::Index>(axis.size())) {
      throw InvalidInput("target '" + name + "': values do not match the time axis");
    }
    if (!values.allFinite()) throw InvalidInput("target '" + name + "' has missing values");
    if (seasonal && axis.size() < 14) throw InvalidInput("seasonal target '" + name + "' needs T >= 14");
  }
};

struct EvaluationOptions {
  /// Model the log of the target; forecasts are exponentiated back.
  bool log_transform = false;
  /// Model first differences of target and predictors; forecasts are re-integrated.
  bool difference = false;
  LassoOptions lasso{};
};

struct KindSummary {
  ModelKind kind;
  double in_sample_mape = 0;
  double out_sample_mape = 0;
  double delta_in = 0;
  double delta_out = 0;
};

struct WindowResult {
  /// First training row, 0-based on the modelled series.
  std::size_t start = 0;
  Period forecast_period;
  double actual = 0;
  /// Per kind, in report order.
  std::vector<double> forecast;
  std::vector<double> in_sample_mape;
  /// In-sample SSE on the modelled scale.
  std::vector<double> sse;
  bool degenerate = false;
};

struct EvaluationReport {
  std::string series;
  std::size_t window_length = 0;
  /// Base first, then the requested kinds in request order.
  std::vector<ModelKind> kinds;
  std::vector<KindSummary> summary;
  std::vector<WindowResult> windows;

  std::size_t kind_index(const ModelKind& k) const {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kinds[i] == k) return i;
    }
    throw InvalidInput("model kind '" + k.name() + "' not in report");
  }
  const KindSummary& at(const ModelKind& k) const { return summary[kind_index(k)]; }
};

/// Lag columns and predictor columns over the whole (transformed) series; rows
/// whose lags are unavailable hold NaN in the lag cells.
inline DesignMatrix build_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& G,
                                 const ItemList& predictor_names, bool seasonal) {
  const Eigen::Index T = y.size();
  const Eigen::Index nb = seasonal ? 3 : 2;
  DesignMatrix d;
  d.n_base = static_cast<std::size_t>(nb);
  d.X.resize(T, nb + G.cols());
  d.names = {"(intercept)", "y[t-1]"};
  if (seasonal) d.names.push_back("y[t-12]");
  for (const auto& n : predictor_names) d.names.push_back(n);
  for (Eigen::Index t = 0; t < T; ++t) {
    d.X(t, 0) = 1.0;
    d.X(t, 1) = t >= 1 ? y[t - 1] : kMissing;
    if (seasonal) d.X(t, 2) = t >= 12 ? y[t - 12] : kMissing;
  }
  d.X.rightCols(G.cols()) = G;
  return d;
}

namespace detail {

/// Predictor block aligned to the target's periods (T x n).
inline Eigen::MatrixXd aligned_predictors(const StitchedPanel& panel, const TimeAxis& axis) {
  Eigen::MatrixXd G(static_cast<Eigen::Index>(axis.size()), static_cast<Eigen::Index>(panel.n_items()));
  for (std::size_t t = 0; t < axis.size(); ++t) {
    const auto src = panel.axis().index_of(axis[t]);
    if (src < 0) throw InvalidInput("panel does not cover target period " + axis[t].str());
    G.row(static_cast<Eigen::Index>(t)) = panel.values().col(src).transpose();
  }
  return G;
}

}  // namespace detail

inline std::size_t first_window_start(bool seasonal) { return seasonal ? 12 : 1; }

inline EvaluationReport rolling_evaluate(const StitchedPanel& panel, const TargetSeries& target,
                                         std::size_t window, std::vector<ModelKind> kinds,
                                         const EvaluationOptions& options = {}) {
  if (window < 2) throw InvalidInput("rolling_evaluate: window length must be >= 2");
  EvaluationReport report;
  report.series = target.name;
  report.window_length = window;
  report.kinds.push_back(ModelKind::base());
  for (const auto& k : kinds) {
    if (std::find(report.kinds.begin(), report.kinds.end(), k) == report.kinds.end()) report.kinds.push_back(k);
  }

  // Modelled series.
  Eigen::VectorXd level = target.values;
  if (options.log_transform) {
    if ((level.array() <= 0).any()) throw InvalidInput("log transform needs a positive target");
    level = level.array().log();
  }
  Eigen::MatrixXd G = detail::aligned_predictors(panel, target.axis);
  Eigen::VectorXd y = level;
  Eigen::Index shift = 0;
  if (options.difference) {
    y = level.tail(level.size() - 1) - level.head(level.size() - 1);
    G = G.bottomRows(G.rows() - 1) - G.topRows(G.rows() - 1);
    shift = 1;
  }
  const auto T = static_cast<std::size_t>(y.size());
  const std::size_t start0 = first_window_start(target.seasonal);
  if (T < window + start0 + 1) {
    throw InvalidInput("rolling_evaluate: series of length " + std::to_string(T) +
                       " too short for window " + std::to_string(window));
  }
  const DesignMatrix design = build_design(y, G, panel.items(), target.seasonal);

  auto to_original = [&](Eigen::Index row, double modelled) {
    const Eigen::Index o = row + shift;
    double z = options.difference ? level[o - 1] + modelled : modelled;
    return options.log_transform ? std::exp(z) : z;
  };

  const std::size_t nk = report.kinds.size();
  std::vector<double> in_sum(nk, 0.0), out_sum(nk, 0.0);
  for (std::size_t t = start0; t + window < T; ++t) {
    const auto first = static_cast<Eigen::Index>(t);
    const auto len = static_cast<Eigen::Index>(window);
    const DesignMatrix train = design.rows(first, len);
    const Eigen::VectorXd ytrain = y.segment(first, len);
    const Eigen::MatrixXd next = design.X.row(first + len);
    if (train.X.hasNaN() || next.hasNaN()) {
      throw InvalidInput("rolling_evaluate: missing predictor values in window starting " +
                         target.axis[static_cast<std::size_t>(first + shift)].str());
    }

    WindowResult w;
    w.start = t;
    w.forecast_period = target.axis[static_cast<std::size_t>(first + len + shift)];
    w.actual = target.values[first + len + shift];
    std::vector<double> actual_in(window);
    for (Eigen::Index r = 0; r < len; ++r) actual_in[static_cast<std::size_t>(r)] = target.values[first + r + shift];

    for (std::size_t k = 0; k < nk; ++k) {
      const auto fit = fit_model(report.kinds[k], train, ytrain, options.lasso);
      w.degenerate |= fit.degenerate;
      const Eigen::VectorXd fitted = fit.predict(train.X);
      std::vector<double> pred_in(window);
      for (Eigen::Index r = 0; r < len; ++r) pred_in[static_cast<std::size_t>(r)] = to_original(first + r, fitted[r]);
      const double forecast = to_original(first + len, fit.predict(next)[0]);
      const double m_in = mape(actual_in, pred_in);
      const double ape = mape(std::vector<double>{w.actual}, std::vector<double>{forecast});
      w.forecast.push_back(forecast);
      w.in_sample_mape.push_back(m_in);
      w.sse.push_back((ytrain - fitted).squaredNorm());
      in_sum[k] += m_in;
      out_sum[k] += ape;
    }
    report.windows.push_back(std::move(w));
  }

  const auto count = static_cast<double>(report.windows.size());
  for (std::size_t k = 0; k < nk; ++k) {
    KindSummary s;
    s.kind = report.kinds[k];
    s.in_sample_mape = in_sum[k] / count;
    s.out_sample_mape = out_sum[k] / count;
    report.summary.push_back(s);
  }
  for (auto& s : report.summary) {
    s.delta_in = s.in_sample_mape - report.summary[0].in_sample_mape;
    s.delta_out = s.out_sample_mape - report.summary[0].out_sample_mape;
  }
  return report;
}

}  // namespace trendagg::nowcast
