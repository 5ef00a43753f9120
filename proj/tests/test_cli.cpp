#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qswitch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qswitch::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("qswitch_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST(Cli, Capacity) {
  EXPECT_EQ(cli({"capacity", "--eta", "0.5"}).out, "1\n");
  EXPECT_EQ(cli({"capacity", "--eta", "0.75"}).out, "2\n");
  const auto r = cli({"capacity", "--eta", "0.99"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(std::stod(r.out), 6.6439, 1e-4);
  EXPECT_EQ(cli({"capacity", "--eta", "1.0"}).code, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
  EXPECT_EQ(cli({"simulate"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--lam", "0.1,0.1"}).code, 1);
  EXPECT_EQ(cli({"simulate", "--lam", "0.1,x,0.1"}).code, 1);
  EXPECT_EQ(cli({"region", "--rule", "sideways"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  const auto help = cli({"simulate", "--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* flag : {"--lam", "--steps", "--seed", "--threshold", "--out", "--scenario", "--p", "--q", "--pnla",
                           "--m", "--rule", "--config"}) {
    EXPECT_NE(help.out.find(flag), std::string::npos) << flag;
  }
}

TEST(Cli, RegionFacets) {
  const auto any = cli({"region", "--scenario", "a", "--p", "0.632"});
  EXPECT_EQ(any.code, 0);
  EXPECT_NE(any.out.find("sum{1} <= 0.399424"), std::string::npos);
  EXPECT_NE(any.out.find("sum{1,2} <= 0.5464120"), std::string::npos);
  EXPECT_NE(any.out.find("sum{1,2,3} <= 0.6934000"), std::string::npos);
  const auto par = cli({"region", "--scenario", "a", "--p", "0.632", "--rule", "parity"});
  EXPECT_NE(par.out.find("sum{1} <= 0.199712"), std::string::npos);
  EXPECT_NE(par.out.find("sum{1,2,3} <= 0.409809"), std::string::npos);
  const auto zero = cli({"region", "--p", "0"});
  EXPECT_NE(zero.out.find("sum{1,2,3} <= 0\n"), std::string::npos);
  EXPECT_EQ(cli({"region", "--p", "1.5"}).code, 2);
  EXPECT_EQ(cli({"region", "--p", "0.5", "--pnla", "0.1"}).code, 2);
}

TEST_F(CliFiles, RegionOutputs) {
  const auto json = dir / "r.json";
  ASSERT_EQ(cli({"region", "--scenario", "b", "--p", "0.5", "--out", json.string()}).code, 0);
  const auto j = nlohmann::json::parse(slurp(json));
  EXPECT_EQ(j["bounds"].size(), 7u);
  const auto csv = dir / "r.csv";
  ASSERT_EQ(cli({"region", "--scenario", "c", "--p", "1", "--format", "csv", "--out", csv.string()}).code, 0);
  EXPECT_EQ(slurp(csv).substr(0, 21), "subset,bound,binding\n");
  const auto samples = dir / "s.csv";
  ASSERT_EQ(cli({"region", "--format", "samples", "--dlam", "0.5", "--out", samples.string()}).code, 0);
  EXPECT_EQ(slurp(samples).substr(0, 25), "lam1,lam2,lam3,in_region\n");
}

TEST(Cli, SimulateExamples) {
  auto r = cli({"simulate", "--lam", "0,0,0", "--steps", "1000"});
  ASSERT_EQ(r.code, 0);
  auto v = nlohmann::json::parse(r.out);
  EXPECT_TRUE(v["stable"].get<bool>());
  EXPECT_EQ(v["slope"].get<double>(), 0.0);

  r = cli({"simulate", "--scenario", "a", "--p", "0.632", "--lam", "0.25,0.25,0.25", "--steps", "100000"});
  ASSERT_EQ(r.code, 0);
  EXPECT_FALSE(nlohmann::json::parse(r.out)["stable"].get<bool>());
  r = cli({"simulate", "--scenario", "a", "--p", "0.632", "--lam", "0.2,0.2,0.2", "--steps", "100000"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["stable"].get<bool>());
}

TEST_F(CliFiles, SimulateWritesTraceAndSummary) {
  const auto trace = dir / "t.csv";
  const auto summary = dir / "s.json";
  const auto r = cli({"simulate", "--lam", "0.1,0.1,0.1", "--steps", "50", "--seed", "3", "--out", trace.string(),
                      "--summary", summary.string(), "--waiting"});
  ASSERT_EQ(r.code, 0);
  const auto text = slurp(trace);
  EXPECT_EQ(text.substr(0, 21), "step,q1,q2,q3,qtotal\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 51);
  const auto s = nlohmann::json::parse(slurp(summary));
  EXPECT_EQ(s["config"]["seed"], 3);
  EXPECT_EQ(s["mean_wait"].size(), 3u);
  // deterministic in the seed
  const auto again = dir / "t2.csv";
  cli({"simulate", "--lam", "0.1,0.1,0.1", "--steps", "50", "--seed", "3", "--out", again.string()});
  EXPECT_EQ(slurp(again), text);
}

TEST_F(CliFiles, ConfigFile) {
  const auto cfg = dir / "topo.json";
  std::ofstream(cfg) << R"({"users": [1, 2, 3, 4], "links": [{"p": 1}, {"p": 1}, {"p": 1}, {"p": 1}],
                            "flows": [{"users": [1, 2]}, {"users": [3, 4]}]})";
  const auto r = cli({"simulate", "--config", cfg.string(), "--lam", "1,1", "--steps", "100"});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out)["stable"].get<bool>());
  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{";
  EXPECT_EQ(cli({"region", "--config", bad.string()}).code, 2);
  EXPECT_EQ(cli({"region", "--config", (dir / "missing.json").string()}).code, 2);
}

TEST_F(CliFiles, SweepAndPlot) {
  const auto csv = dir / "sweep.csv";
  const auto summary = dir / "sweep.json";
  auto r = cli({"sweep", "--scenario", "c", "--dlam", "0.5", "--steps", "2000", "--quiet", "--threads", "2", "--out",
                csv.string(), "--summary", summary.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "lam1,lam2,lam3,slope,stable,inside,agree");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 28);
  EXPECT_EQ(nlohmann::json::parse(slurp(summary))["records"], 27);

  const auto svg = dir / "plot.svg";
  r = cli({"plot", "--scenario", "c", "--input", csv.string(), "--out", svg.string(), "--title", "C"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto first = slurp(svg);
  EXPECT_NE(first.find("<circle"), std::string::npos);
  cli({"plot", "--scenario", "c", "--input", csv.string(), "--out", svg.string(), "--title", "C"});
  EXPECT_EQ(slurp(svg), first);
  EXPECT_EQ(cli({"plot", "--input", (dir / "none.csv").string(), "--out", svg.string()}).code, 2);
}

TEST(Cli, SweepResourceCap) {
  const auto r = cli({"sweep", "--reference-grid", "--quiet"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("simulated steps"), std::string::npos);
}
