// trendagg: simulate, aggregate, nowcast, cluster and corr from the command line.

#include "trendagg/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace trendagg;

std::vector<nowcast::ModelKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<nowcast::ModelKind> out;
  for (const auto& n : names) out.push_back(nowcast::ModelKind::parse(n));
  return out;
}

AnchorRule parse_anchor(const std::string& s) {
  if (s == "item") return AnchorRule::kLargestItemSum;
  if (s == "comparator") return AnchorRule::kLargestComparatorSum;
  throw InvalidInput("unknown anchor rule '" + s + "' (expected item or comparator)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combine pairwise search-volume comparisons into one index and analyse it"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_dir = ".";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  };

  cli::SimulateOptions sim;
  std::string start = "2008-01";
  auto* simulate = app.add_subcommand("simulate", "Simulate a comparison tensor, its latent panel and a target");
  common(simulate);
  simulate->add_option("--items", sim.config.n_items, "Number of items")->capture_default_str();
  simulate->add_option("--comparators", sim.config.n_comparators, "Number of comparators")->capture_default_str();
  simulate->add_option("--periods", sim.config.n_periods, "Number of monthly periods")->capture_default_str();
  simulate->add_option("--start", start, "First period (YYYY-MM)")->capture_default_str();

  cli::AggregateOptions agg;
  std::string tensor_path, truth_path, anchor = "item";
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Build the aggregate index and stitched panel");
  common(aggregate_cmd);
  aggregate_cmd->add_option("tensor", tensor_path, "Comparison tensor CSV")->required();
  aggregate_cmd->add_option("--nc", agg.nc, "Items per chain block before the base resets")->capture_default_str();
  aggregate_cmd->add_option("--truth", truth_path, "Latent panel CSV; prints the rank correlation with it");
  aggregate_cmd->add_option("--anchor", anchor, "Stitch anchor: item (largest S+) or comparator (largest S-)")
      ->capture_default_str();

  cli::NowcastOptions nc;
  std::string panel_path;
  std::vector<std::string> target_paths, kind_names{"full", "fwd", "lasso", "pca1", "pca2", "pca3"};
  std::vector<std::size_t> windows{30, 60, 90};
  bool seasonal = false, log_transform = false, difference = false;
  auto* nowcast_cmd = app.add_subcommand("nowcast", "Rolling-window nowcast evaluation");
  common(nowcast_cmd);
  nowcast_cmd->add_option("panel", panel_path, "Stitched panel CSV")->required();
  nowcast_cmd->add_option("--target", target_paths, "Target series CSV (repeatable)")->required();
  nowcast_cmd->add_option("--window", windows, "Training window length (repeatable)")->capture_default_str();
  nowcast_cmd->add_option("--kinds", kind_names, "Model kinds besides base: full fwd lasso pcaK")
      ->delimiter(',')
      ->capture_default_str();
  nowcast_cmd->add_flag("--seasonal", seasonal, "Add the y[t-12] regressor");
  nowcast_cmd->add_flag("--log-transform", log_transform, "Model the log of the target");
  nowcast_cmd->add_flag("--difference", difference, "Model first differences");

  cli::ClusterOptions cl;
  std::string cluster_panel, distance = "euclidean";
  auto* cluster_cmd = app.add_subcommand("cluster", "k-medoids clustering with an MDS map");
  common(cluster_cmd);
  cluster_cmd->add_option("panel", cluster_panel, "Panel CSV")->required();
  cluster_cmd->add_option("--distance", distance, "euclidean or piccolo")->capture_default_str();
  cluster_cmd->add_option("--k", cl.k, "Number of clusters")->capture_default_str();

  cli::CorrOptions corr;
  std::string x_path, y_path, z_path;
  std::vector<int> lags{-5, -1, 0, 1, 5};
  auto* corr_cmd = app.add_subcommand("corr", "Lagged correlations between two panels with sign tests");
  common(corr_cmd);
  corr_cmd->add_option("x", x_path, "First panel CSV (e.g. search volume)")->required();
  corr_cmd->add_option("y", y_path, "Second panel CSV (e.g. prices)")->required();
  corr_cmd->add_option("--z", z_path, "Control series CSV for partial correlations");
  corr_cmd->add_option("--lags", lags, "Lags; positive means x lags y")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) {
      sim.config.seed = seed;
      sim.config.start = Period::parse(start);
      sim.out_dir = out_dir;
      cli::run_simulate(sim, std::cout);
    } else if (aggregate_cmd->parsed()) {
      agg.tensor = tensor_path;
      if (!truth_path.empty()) agg.truth = truth_path;
      agg.anchor = parse_anchor(anchor);
      agg.out_dir = out_dir;
      cli::run_aggregate(agg, std::cout);
    } else if (nowcast_cmd->parsed()) {
      nc.panel = panel_path;
      nc.targets.assign(target_paths.begin(), target_paths.end());
      nc.windows = windows;
      nc.kinds = parse_kinds(kind_names);
      nc.seasonal = seasonal;
      nc.evaluation.log_transform = log_transform;
      nc.evaluation.difference = difference;
      nc.out_dir = out_dir;
      cli::run_nowcast(nc, std::cout);
    } else if (cluster_cmd->parsed()) {
      cl.panel = cluster_panel;
      cl.distance = cli::parse_distance_kind(distance);
      cl.seed = seed;
      cl.out_dir = out_dir;
      cli::run_cluster(cl, std::cout);
    } else if (corr_cmd->parsed()) {
      corr.x = x_path;
      corr.y = y_path;
      if (!z_path.empty()) corr.z = z_path;
      corr.lags = lags;
      corr.out_dir = out_dir;
      cli::run_corr(corr, std::cout);
    }
  } catch (const io::CsvError& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 3;
  } catch (const InvalidInput& e) {
    std::cerr << "error: invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
