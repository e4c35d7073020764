#pragma once

// The five pipeline commands behind the trendagg executable. Each reads and
// writes files only through trendagg::io, logs a short summary to `log`, and
// throws on error.

#include "trendagg/aggregator.hpp"
#include "trendagg/io/csv.hpp"
#include "trendagg/io/svg.hpp"
#include "trendagg/nowcast.hpp"
#include "trendagg/simulator.hpp"
#include "trendagg/stats.hpp"
#include "trendagg/tsanalysis.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace trendagg::cli {

namespace fs = std::filesystem;

/// Seed for a named subcomponent, derived from the run seed.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t role) { return detail::stream(seed, 100 + role, 0)(); }

inline void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw InvalidInput(std::string(what) + " '" + p.string() + "' does not exist");
}

inline void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error("cannot create output directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
  SimulationConfig config{};
  TargetProcess target{};
  fs::path out_dir = ".";
};

/// Writes tensor.csv, latent.csv (ground truth) and target.csv.
inline void run_simulate(const SimulateOptions& o, std::ostream& log) {
  prepare_out_dir(o.out_dir);
  const auto study = simulate(o.config);
  const auto tensor = build_comparison_tensor(study.items, study.comparators);
  const Eigen::VectorXd y = simulate_target(study.items, o.config.seed, o.target);
  io::write_tensor(o.out_dir / "tensor.csv", tensor);
  io::write_latent(o.out_dir / "latent.csv", study.items);
  io::write_target(o.out_dir / "target.csv", nowcast::TargetSeries("target", study.items.axis(), y, false));
  log << "simulated " << tensor.n_items() << " items x " << tensor.n_comparators() << " comparators x "
      << tensor.n_periods() << " periods\n";
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

struct AggregateOptions {
  fs::path tensor;
  std::size_t nc = 30;
  AnchorRule anchor = AnchorRule::kLargestItemSum;
  std::optional<fs::path> truth;
  fs::path out_dir = ".";
};

struct AggregateSummary {
  std::size_t warnings = 0;
  std::optional<double> spearman;
};

/// Writes index.csv and panel.csv.
inline AggregateSummary run_aggregate(const AggregateOptions& o, std::ostream& log) {
  require_file(o.tensor, "tensor file");
  if (o.truth) require_file(*o.truth, "truth file");
  prepare_out_dir(o.out_dir);
  const auto tensor = io::read_tensor(o.tensor);
  AggregateSummary out;
  const auto violations = validate_tensor(tensor);
  out.warnings = violations.size();
  for (std::size_t v = 0; v < violations.size() && v < 10; ++v) log << "warning: " << violations[v].message << "\n";
  if (violations.size() > 10) log << "warning: " << violations.size() - 10 << " more violations\n";

  AggregatorConfig config;
  config.nc = o.nc;
  const auto index = aggregate(tensor, config);
  const auto panel = stitch(tensor, index, o.anchor);
  io::write_index(o.out_dir / "index.csv", index);
  io::write_panel(o.out_dir / "panel.csv", panel);
  log << "aggregated " << index.items.size() << " items (NC=" << o.nc << ")\n";

  if (o.truth) {
    const auto truth = io::read_latent(*o.truth);
    if (truth.items() != index.items) throw InvalidInput("truth panel items do not match the tensor items");
    const Eigen::VectorXd totals = truth.totals();
    out.spearman = stats::spearman(std::span<const double>(index.ag_ratings.data(), index.ag_ratings.size()),
                                   std::span<const double>(totals.data(), totals.size()));
    log << "spearman(ag_rating, true total) = " << io::format_real(*out.spearman) << "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// nowcast
// ---------------------------------------------------------------------------

struct NowcastOptions {
  fs::path panel;
  std::vector<fs::path> targets;
  std::vector<std::size_t> windows{30, 60, 90};
  std::vector<nowcast::ModelKind> kinds{nowcast::ModelKind::full(), nowcast::ModelKind::forward(),
                                        nowcast::ModelKind::lasso(), nowcast::ModelKind::pca(1),
                                        nowcast::ModelKind::pca(2), nowcast::ModelKind::pca(3)};
  bool seasonal = false;
  nowcast::EvaluationOptions evaluation{};
  fs::path out_dir = ".";
};

/// Writes nowcast.csv (per window length, series and sample: base MAPE and the
/// MAPE difference of every other kind) and forecasts.csv (one row per window).
inline std::vector<nowcast::EvaluationReport> run_nowcast(const NowcastOptions& o, std::ostream& log) {
  require_file(o.panel, "panel file");
  if (o.targets.empty()) throw InvalidInput("nowcast needs at least one target file");
  for (const auto& t : o.targets) require_file(t, "target file");
  if (o.windows.empty()) throw InvalidInput("nowcast needs at least one window length");
  prepare_out_dir(o.out_dir);
  const auto panel = io::read_panel(o.panel);

  std::vector<nowcast::EvaluationReport> reports;
  for (std::size_t P : o.windows) {
    for (const auto& path : o.targets) {
      const auto target = io::read_target(path, o.seasonal);
      reports.push_back(nowcast::rolling_evaluate(panel, target, P, o.kinds, o.evaluation));
    }
  }

  const auto& kinds = reports.front().kinds;
  std::vector<std::string> header{"tw", "series", "sample", "base"};
  for (std::size_t k = 1; k < kinds.size(); ++k) header.push_back("delta_" + kinds[k].name());
  io::CsvWriter table("nowcast", header);
  for (const char* sample : {"in", "out"}) {
    const bool in = std::string_view(sample) == "in";
    for (const auto& r : reports) {
      std::vector<std::string> row{std::to_string(r.window_length), r.series, sample,
                                   io::format_real(in ? r.summary[0].in_sample_mape : r.summary[0].out_sample_mape)};
      for (std::size_t k = 1; k < r.summary.size(); ++k) {
        row.push_back(io::format_real(in ? r.summary[k].delta_in : r.summary[k].delta_out));
      }
      table.row(row);
    }
  }
  table.save(o.out_dir / "nowcast.csv");

  std::vector<std::string> trace_header{"tw", "series", "period", "actual"};
  for (const auto& k : kinds) trace_header.push_back(k.name());
  io::CsvWriter trace("forecasts", trace_header);
  for (const auto& r : reports) {
    for (const auto& w : r.windows) {
      std::vector<std::string> row{std::to_string(r.window_length), r.series, w.forecast_period.str(),
                                   io::format_real(w.actual)};
      for (double f : w.forecast) row.push_back(io::format_real(f));
      trace.row(row);
    }
  }
  trace.save(o.out_dir / "forecasts.csv");
  log << "evaluated " << reports.size() << " (window, series) combinations over " << kinds.size() << " model kinds\n";
  return reports;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

enum class DistanceKind { kEuclidean, kPiccolo };

inline DistanceKind parse_distance_kind(const std::string& s) {
  if (s == "euclidean") return DistanceKind::kEuclidean;
  if (s == "piccolo") return DistanceKind::kPiccolo;
  throw InvalidInput("unknown distance '" + s + "' (expected euclidean or piccolo)");
}

struct ClusterOptions {
  fs::path panel;
  DistanceKind distance = DistanceKind::kEuclidean;
  std::size_t k = 4;
  std::uint64_t seed = 1;
  fs::path out_dir = ".";
};

struct ClusterResult {
  ts::DistanceMatrix distances;
  ts::Clustering clustering;
  ts::Embedding embedding;
};

/// Euclidean distances use log values; Piccolo distances use AR fits of the
/// first differences, with ADF results for both levels and differences.
/// Writes distances.csv, clustering.csv, mds.csv, adf.csv (Piccolo only),
/// scatter.svg and clusters.svg.
inline ClusterResult run_cluster(const ClusterOptions& o, std::ostream& log) {
  require_file(o.panel, "panel file");
  prepare_out_dir(o.out_dir);
  const auto panel = io::read_panel(o.panel);
  if (panel.has_missing()) throw InvalidInput("cluster: panel has missing values");
  const ItemList& items = panel.items();
  const Eigen::MatrixXd logs = ts::log_with_floor(panel.values());

  std::optional<ts::DistanceMatrix> dm;
  if (o.distance == DistanceKind::kEuclidean) {
    dm = ts::euclidean_distances(items, logs);
  } else {
    std::vector<ts::ARFit> fits;
    io::CsvWriter adf("adf", {"item", "series", "statistic", "critical_5pct", "lags", "n_obs", "stationary"});
    for (Eigen::Index i = 0; i < panel.values().rows(); ++i) {
      const auto level = ts::row_of(panel.values(), i);
      const auto diff = ts::difference(level);
      for (const auto& [name, x] : {std::pair{"level", &level}, std::pair{"difference", &diff}}) {
        const auto r = ts::adf_test(*x);
        adf.row({items[static_cast<std::size_t>(i)], name, io::format_real(r.statistic),
                 io::format_real(r.critical_value_5pct), std::to_string(r.lags), std::to_string(r.n_obs),
                 r.reject ? "1" : "0"});
      }
      fits.push_back(ts::ar_fit(diff));
    }
    adf.save(o.out_dir / "adf.csv");
    dm = ts::piccolo_distances(items, fits);
  }

  auto clustering = ts::k_medoids(*dm, o.k, sub_seed(o.seed, 0));
  ts::Embedding embedding;
  const bool all_zero = dm->d().maxCoeff() <= 0;
  if (all_zero) {
    embedding.coordinates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dm->size()), 2);
  } else {
    ts::SmacofOptions mds;
    mds.seed = sub_seed(o.seed, 1);
    embedding = ts::smacof_mds(*dm, mds);
  }

  io::write_distances(o.out_dir / "distances.csv", *dm);
  io::CsvWriter cl("clustering", {"item", "cluster", "medoid", "silhouette"});
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t c = clustering.assignment[i];
    cl.row({items[i], std::to_string(c + 1), items[clustering.medoids[c]], io::format_real(clustering.silhouette[i])});
  }
  cl.save(o.out_dir / "clustering.csv");
  io::CsvWriter mds("mds", {"item", "x", "y"});
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    mds.row({items[i], io::format_real(embedding.coordinates(ii, 0)), io::format_real(embedding.coordinates(ii, 1))});
  }
  mds.save(o.out_dir / "mds.csv");

  const std::string label = o.distance == DistanceKind::kEuclidean ? "Euclidean" : "Piccolo";
  io::write_atomic(o.out_dir / "scatter.svg",
                   io::scatter_svg(embedding.coordinates, items, clustering.assignment, o.k,
                                   label + " distances, MDS stress " + io::svg::num(embedding.stress)));
  std::vector<std::string> periods;
  for (const auto& p : panel.axis().periods()) periods.push_back(p.str());
  io::write_atomic(o.out_dir / "clusters.svg",
                   io::cluster_lines_svg(logs, items, clustering.assignment, o.k, periods,
                                         label + " clusters, log values"));
  log << "clustered " << items.size() << " items into " << o.k << " groups (cost "
      << io::format_real(clustering.total_cost) << ", MDS stress " << io::format_real(embedding.stress) << ")\n";
  return {std::move(*dm), std::move(clustering), std::move(embedding)};
}

// ---------------------------------------------------------------------------
// corr
// ---------------------------------------------------------------------------

struct CorrOptions {
  fs::path x;
  fs::path y;
  /// Control series for partial correlations, aligned with y.
  std::optional<fs::path> z;
  std::vector<int> lags{-5, -1, 0, 1, 5};
  fs::path out_dir = ".";
};

struct LagSummary {
  int lag = 0;
  std::string measure;
  double mean_r = 0;
  stats::SignTestResult sign{};
};

/// Correlates x[item, t + lag] with y[item, t] for items present in both
/// panels over their common periods. Writes corr.csv and corr_summary.csv.
inline std::vector<LagSummary> run_corr(const CorrOptions& o, std::ostream& log) {
  require_file(o.x, "x panel");
  require_file(o.y, "y panel");
  if (o.z) require_file(*o.z, "z series");
  if (o.lags.empty()) throw InvalidInput("corr needs at least one lag");
  prepare_out_dir(o.out_dir);
  const auto px = io::read_panel(o.x);
  const auto py = io::read_panel(o.y);
  std::optional<nowcast::TargetSeries> z;
  if (o.z) z = io::read_target(*o.z);

  // Common periods.
  const Period lo = std::max(px.axis().front(), py.axis().front());
  Period hi = std::min(px.axis().back(), py.axis().back());
  Period first = lo;
  if (z) {
    first = std::max(first, z->axis.front());
    hi = std::min(hi, z->axis.back());
  }
  if (hi.ordinal() - first.ordinal() < 1) throw InvalidInput("corr: inputs share fewer than two periods");
  const auto axis = TimeAxis::monthly(first, static_cast<std::size_t>(hi.ordinal() - first.ordinal() + 1));
  auto slice = [&](const StitchedPanel& p, Eigen::Index row) {
    std::vector<double> out(axis.size());
    for (std::size_t t = 0; t < axis.size(); ++t) out[t] = p.values()(row, p.axis().index_of(axis[t]));
    return out;
  };
  std::vector<double> zs;
  if (z) {
    for (std::size_t t = 0; t < axis.size(); ++t) zs.push_back(z->values[z->axis.index_of(axis[t])]);
  }

  std::vector<std::string> header{"item", "lag", "n", "r", "p_value"};
  if (z) header.insert(header.end(), {"partial_r", "partial_p_value"});
  io::CsvWriter table("corr", header);
  const std::size_t nl = o.lags.size();
  std::vector<std::vector<double>> rs(nl), partials(nl);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < px.items().size(); ++i) {
    const auto it = std::find(py.items().begin(), py.items().end(), px.items()[i]);
    if (it == py.items().end()) continue;
    ++matched;
    const auto xs = slice(px, static_cast<Eigen::Index>(i));
    const auto ys = slice(py, static_cast<Eigen::Index>(it - py.items().begin()));
    for (std::size_t l = 0; l < nl; ++l) {
      const int lag = o.lags[l];
      const auto r = stats::cross_correlation(xs, ys, lag);
      std::vector<std::string> row{px.items()[i], std::to_string(lag), std::to_string(r.n), io::format_real(r.r),
                                   io::format_real(r.p_value)};
      rs[l].push_back(r.r);
      if (z) {
        // Same overlap as cross_correlation: x[t + lag] against y[t], z[t].
        const auto T = static_cast<std::ptrdiff_t>(xs.size());
        const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, -lag), b = std::min<std::ptrdiff_t>(T, T - lag);
        std::vector<double> xa, ya, za;
        for (std::ptrdiff_t t = a; t < b; ++t) {
          xa.push_back(xs[static_cast<std::size_t>(t + lag)]);
          ya.push_back(ys[static_cast<std::size_t>(t)]);
          za.push_back(zs[static_cast<std::size_t>(t)]);
        }
        const auto pr = stats::partial_correlation(xa, ya, za);
        row.push_back(io::format_real(pr.r));
        row.push_back(io::format_real(pr.p_value));
        partials[l].push_back(pr.r);
      }
      table.row(row);
    }
  }
  if (matched == 0) throw InvalidInput("corr: the panels share no items");
  table.save(o.out_dir / "corr.csv");

  std::vector<LagSummary> out;
  auto summarize = [&](const std::vector<double>& v, int lag, const char* measure) {
    LagSummary s;
    s.lag = lag;
    s.measure = measure;
    std::size_t positive = 0;
    for (double r : v) {
      s.mean_r += r;
      positive += r > 0 ? 1 : 0;
    }
    s.mean_r /= static_cast<double>(v.size());
    s.sign = stats::sign_binomial_test(positive, v.size());
    out.push_back(s);
  };
  for (std::size_t l = 0; l < nl; ++l) summarize(rs[l], o.lags[l], "pearson");
  if (z) {
    for (std::size_t l = 0; l < nl; ++l) summarize(partials[l], o.lags[l], "partial");
  }
  io::CsvWriter summary("corr_summary", {"measure", "lag", "mean_r", "positive", "n", "p_value"});
  for (const auto& s : out) {
    summary.row({s.measure, std::to_string(s.lag), io::format_real(s.mean_r), std::to_string(s.sign.k),
                 std::to_string(s.sign.n), io::format_real(s.sign.p_value)});
  }
  summary.save(o.out_dir / "corr_summary.csv");
  log << "correlated " << matched << " items at " << nl << " lags\n";
  return out;
}

}  // namespace trendagg::cli
