#include "trendagg/aggregator.hpp"
#include "trendagg/io/csv.hpp"
#include "trendagg/io/svg.hpp"
#include "trendagg/simulator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace trendagg;
using namespace trendagg::io;
namespace fs = std::filesystem;

namespace {

SimulatedStudy small_study() {
  SimulationConfig c;
  c.n_items = 8;
  c.n_comparators = 2;
  c.n_periods = 15;
  c.seed = 9;
  return simulate(c);
}

CsvTable table_from(const std::string& text, std::string_view kind, const std::vector<std::string>& required) {
  std::istringstream in(text);
  return parse_table(in, "mem.csv", kind, required);
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trendagg_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void expect_close(double a, double b) {
  if (std::isnan(a)) {
    EXPECT_TRUE(std::isnan(b));
  } else {
    EXPECT_LE(std::abs(a - b), 1e-12 * std::abs(a));
  }
}

}  // namespace

TEST(FormatReal, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::pow(10.0, u(rng)) * (k % 2 ? 1 : -1);
    const auto s = format_real(v);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(format_real(kMissing), "");
  EXPECT_EQ(format_real(0.5), "0.5");
}

TEST(QuoteField, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(quote_field("plain"), "plain");
  EXPECT_EQ(quote_field("a,b"), "\"a,b\"");
  EXPECT_EQ(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(TensorCsv, RoundTripWithMissingCells) {
  const auto study = small_study();
  const auto x0 = build_comparison_tensor(study.items, study.comparators);
  auto plus = x0.p_plus_data(), minus = x0.p_minus_data();
  auto missing = x0.missing_data();
  for (std::size_t k : {3u, 40u, 77u}) {
    missing[k] = 1;
    plus[k] = minus[k] = 0;
  }
  const ComparisonTensor x(x0.items(), x0.comparators(), x0.axis(), plus, minus, missing);
  const auto back = parse_tensor(table_from(tensor_csv(x), "tensor", {}));
  EXPECT_EQ(back.items(), x.items());
  EXPECT_EQ(back.comparators(), x.comparators());
  EXPECT_EQ(back.axis(), x.axis());
  EXPECT_EQ(back.p_plus_data(), x.p_plus_data());
  EXPECT_EQ(back.p_minus_data(), x.p_minus_data());
  EXPECT_EQ(back.missing_data(), x.missing_data());
}

TEST(TensorCsv, AbsentRowsAreMissingAndDuplicatesFail) {
  const std::string text =
      "# trendagg-csv v1.0 tensor\n"
      "item,comparator,period,p_plus,p_minus\n"
      "a,c,2010-01,50,100\n"
      "a,c,2010-03,100,40\n";
  const auto x = parse_tensor(table_from(text, "tensor", {}));
  EXPECT_EQ(x.n_periods(), 3u);
  EXPECT_TRUE(x.missing(0, 0, 1));
  EXPECT_EQ(x.p_minus(0, 0, 2), 40);
  try {
    parse_tensor(table_from(text + "a,c,2010-01,50,100\n", "tensor", {}));
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

TEST(PanelCsv, LatentAndStitchedRoundTrip) {
  const auto study = small_study();
  const auto latent = parse_latent(table_from(latent_csv(study.items), "latent", {}));
  EXPECT_EQ(latent.items(), study.items.items());
  for (Eigen::Index k = 0; k < latent.volumes().size(); ++k) expect_close(study.items.volumes().data()[k], latent.volumes().data()[k]);

  const auto x = build_comparison_tensor(study.items, study.comparators);
  auto panel = stitch(x, aggregate(x, {}));
  Eigen::MatrixXd v = panel.values();
  v(2, 4) = kMissing;
  const StitchedPanel with_gap(panel.items(), panel.axis(), v);
  const auto back = parse_panel(table_from(panel_csv(with_gap), "panel", {}));
  for (Eigen::Index k = 0; k < v.size(); ++k) expect_close(v.data()[k], back.values().data()[k]);
}

TEST(PanelCsv, ReadPanelAcceptsLatentFiles) {
  const auto dir = scratch_dir("latent");
  const auto study = small_study();
  write_latent(dir / "latent.csv", study.items);
  const auto p = read_panel(dir / "latent.csv");
  EXPECT_EQ(p.items(), study.items.items());
  EXPECT_EQ(p.values(), study.items.volumes());
}

TEST(TargetCsv, RoundTripAndName) {
  const auto dir = scratch_dir("target");
  const auto axis = TimeAxis::monthly({2001, 6}, 20);
  Eigen::VectorXd y(20);
  for (Eigen::Index t = 0; t < 20; ++t) y[t] = 1.0 / (3.0 + static_cast<double>(t));
  write_target(dir / "gdp.csv", nowcast::TargetSeries("ignored", axis, y, false));
  const auto back = read_target(dir / "gdp.csv", true);
  EXPECT_EQ(back.name, "gdp");
  EXPECT_TRUE(back.seasonal);
  EXPECT_EQ(back.axis, axis);
  EXPECT_EQ(back.values, y);
}

TEST(IndexCsv, RoundTrip) {
  const auto study = small_study();
  const auto x = build_comparison_tensor(study.items, study.comparators);
  AggregatorConfig cfg;
  cfg.nc = 3;
  const auto index = aggregate(x, cfg);
  const auto back = parse_index(table_from(index_csv(index), "index", {}));
  EXPECT_EQ(back.items, index.items);
  EXPECT_EQ(back.sort_order, index.sort_order);
  EXPECT_EQ(back.base_of, index.base_of);
  EXPECT_EQ(back.ag_ratings, index.ag_ratings);
  EXPECT_EQ(back.multipliers, index.multipliers);
  EXPECT_EQ(back.scale_multipliers, index.scale_multipliers);
  EXPECT_EQ(back.sum_plus, index.sum_plus);
}

TEST(DistancesCsv, RoundTripAndIncompleteInput) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1.25, 2.0 / 3.0, 1.25, 0, 7, 2.0 / 3.0, 7, 0;
  const ts::DistanceMatrix dm({"x", "y", "z"}, d);
  const auto back = parse_distances(table_from(distances_csv(dm), "distances", {}));
  EXPECT_EQ(back.labels(), dm.labels());
  EXPECT_EQ(back.d(), dm.d());
  const std::string partial = "# trendagg-csv v1.0 distances\na,b,distance\nx,y,1\nx,z,2\n";
  EXPECT_THROW(parse_distances(table_from(partial, "distances", {})), CsvError);
}

TEST(CsvErrors, NameTheOffendingLine) {
  const std::string head = "# trendagg-csv v1.0 panel\nitem,period,value\n";
  auto line_of = [&](const std::string& body) -> std::size_t {
    try {
      parse_panel(table_from(head + body, "panel", {"item", "period", "value"}));
    } catch (const CsvError& e) {
      EXPECT_NE(std::string(e.what()).find("mem.csv:" + std::to_string(e.line())), std::string::npos);
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("a,2010-01,1\na,2010-02\n"), 4u);
  EXPECT_EQ(line_of("a,2010-01,1\na,2010-02,abc\n"), 4u);
  EXPECT_EQ(line_of("a,2010-01,1\na,2010-13,2\n"), 4u);
  EXPECT_EQ(line_of("a,2010-01,1\n\"a,2010-02,2\n"), 4u);
  EXPECT_EQ(line_of("a,2010-01,1\na,2010-02,-4\n"), 3u);
}

TEST(CsvErrors, SchemaLineIsChecked) {
  EXPECT_THROW(table_from("item,period,value\n", "panel", {}), CsvError);
  EXPECT_THROW(table_from("# trendagg-csv v2.0 panel\nitem,period,value\n", "panel", {}), CsvError);
  EXPECT_NO_THROW(table_from("# trendagg-csv v1.7 panel\nitem,period,value\n", "panel", {}));
  EXPECT_THROW(table_from("# trendagg-csv v1.0 target\nperiod,value\n", "panel", {}), CsvError);
  EXPECT_THROW(table_from("# trendagg-csv v1.0 panel\nitem,value\n", "panel", {"item", "period"}), CsvError);
}

TEST(CsvParse, QuotedFieldsAndCrLf) {
  const auto t = table_from("# trendagg-csv v1.0 panel\r\nitem,period,value\r\n\"Big, Co\",2010-01,3\r\n", "panel", {});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "Big, Co");
  EXPECT_EQ(t.rows[0][2], "3");
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemporary) {
  const auto dir = scratch_dir("atomic");
  write_atomic(dir / "f.csv", "one\n");
  write_atomic(dir / "f.csv", "two\n");
  std::ifstream in(dir / "f.csv");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "two");
  EXPECT_FALSE(fs::exists(dir / "f.csv.tmp"));
  EXPECT_THROW(write_atomic(dir / "missing" / "f.csv", "x"), Error);
}

TEST(Svg, ScatterIsWellFormedAndDeterministic) {
  Eigen::MatrixXd coords(3, 2);
  coords << 0, 0, 1, 2, -1, 0.5;
  const auto a = scatter_svg(coords, {"a", "b<c", "d"}, {0, 1, 1}, 2, "map");
  EXPECT_EQ(a, scatter_svg(coords, {"a", "b<c", "d"}, {0, 1, 1}, 2, "map"));
  EXPECT_NE(a.find("<svg"), std::string::npos);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_NE(a.find("b&lt;c"), std::string::npos);
  EXPECT_NE(a.find(kGeneratorVersion), std::string::npos);
}
