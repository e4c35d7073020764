#include "trendagg/io/csv.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + std::string(TRENDAGG_CLI) + "' " + args +
                          " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("trendagg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, UnknownSubcommandFails) {
  const auto dir = fresh_dir("unknown");
  EXPECT_NE(run(dir, "frobnicate").code, 0);
  EXPECT_NE(run(dir, "").code, 0);
}

TEST(Cli, SimulateThenAggregatePrintsSpearman) {
  const auto dir = fresh_dir("agg");
  ASSERT_EQ(run(dir, "simulate --seed 2 --items 40 --comparators 5 --periods 60").code, 0);
  const auto r = run(dir, "aggregate tensor.csv --truth latent.csv --nc 10");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("spearman(ag_rating, true total) = ");
  ASSERT_NE(pos, std::string::npos) << r.out;
  EXPECT_GE(std::stod(r.out.substr(pos + 34)), 0.99);
  const auto index = trendagg::io::read_index(dir / "index.csv");
  EXPECT_EQ(index.items.size(), 40u);
  EXPECT_TRUE(fs::exists(dir / "panel.csv"));
}

TEST(Cli, NowcastWithBaseOnlyHasNoDeltaColumns) {
  const auto dir = fresh_dir("base");
  ASSERT_EQ(run(dir, "simulate --seed 3 --items 10 --comparators 2 --periods 50").code, 0);
  ASSERT_EQ(run(dir, "aggregate tensor.csv").code, 0);
  const auto r = run(dir, "nowcast panel.csv --target target.csv --window 30 --kinds base");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = trendagg::io::read_table(dir / "nowcast.csv", "nowcast", {"tw", "series", "sample", "base"});
  EXPECT_EQ(t.header, (std::vector<std::string>{"tw", "series", "sample", "base"}));
  EXPECT_EQ(t.rows.size(), 2u);
}

TEST(Cli, ClusterWithOneGroupHasZeroSilhouettes) {
  const auto dir = fresh_dir("k1");
  ASSERT_EQ(run(dir, "simulate --seed 4 --items 12 --comparators 2 --periods 40").code, 0);
  const auto r = run(dir, "cluster latent.csv --k 1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = trendagg::io::read_table(dir / "clustering.csv", "clustering", {"cluster", "silhouette"});
  ASSERT_EQ(t.rows.size(), 12u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i][t.column("cluster")], "1");
    EXPECT_EQ(t.real(i, t.column("silhouette")), 0.0);
  }
  EXPECT_TRUE(fs::exists(dir / "scatter.svg"));
  EXPECT_TRUE(fs::exists(dir / "clusters.svg"));
}

TEST(Cli, MalformedCsvReportsLineNumber) {
  const auto dir = fresh_dir("bad");
  std::ofstream(dir / "bad.csv") << "# trendagg-csv v1.0 tensor\n"
                                    "item,comparator,period,p_plus,p_minus\n"
                                    "a,c,2010-01,50,100\n"
                                    "a,c,2010-02,fifty,100\n";
  const auto r = run(dir, "aggregate bad.csv");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("bad.csv:4:"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputAndBadOptionsFail) {
  const auto dir = fresh_dir("missing");
  const auto r = run(dir, "aggregate nowhere.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nowhere.csv"), std::string::npos);
  EXPECT_NE(run(dir, "cluster nowhere.csv --distance manhattan").code, 0);
  EXPECT_NE(run(dir, "aggregate").code, 0);
}

TEST(Cli, CorrWritesBatteryAndSummary) {
  const auto dir = fresh_dir("corr");
  ASSERT_EQ(run(dir, "simulate --seed 5 --items 12 --comparators 2 --periods 40").code, 0);
  ASSERT_EQ(run(dir, "aggregate tensor.csv").code, 0);
  const auto r = run(dir, "corr panel.csv latent.csv --lags -1,0,2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto battery = trendagg::io::read_table(dir / "corr.csv", "corr", {"item", "lag", "r", "p_value"});
  EXPECT_EQ(battery.rows.size(), 36u);
  const auto summary = trendagg::io::read_table(dir / "corr_summary.csv", "corr_summary", {"lag", "p_value"});
  EXPECT_EQ(summary.rows.size(), 3u);
}
