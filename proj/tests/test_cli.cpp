#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "adascale/cli/commands.hpp"
#include "adascale/cli/config.hpp"
#include "adascale/errors.hpp"

using namespace adascale;
using namespace adascale::cli;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
# two-dimensional noisy quadratic
objective.kind = noisy_quadratic
objective.a_diag = 1, 0.5
objective.w0 = 1, 1
schedule.family = constant
schedule.eta0 = 0.1
run.algorithm = adascale
run.S = 4
run.T_SI = 100
)";

std::string base(std::string_view sigma = "0.2, 0.2") {
  return std::string(kBase) + "objective.sigma_diag = " + std::string(sigma) + "\n";
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("adascale_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  for (std::string line; std::getline(f, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

CommandOptions quiet(std::ostringstream& out, std::ostringstream& err) {
  CommandOptions o;
  o.out = &out;
  o.err = &err;
  return o;
}

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  auto spec = parse_spec(base() +
                         "gain.theta = 0.5\nrun.elastic = 0:2, 50:8\nrun.seeds = 1,2,3\n"
                         "sweep.axis = theta\nsweep.theta = 0, 1-S/100, max(1-S/10,0)\n");
  EXPECT_EQ(spec.train.S, 4);
  EXPECT_EQ(spec.train.T_SI, 100);
  EXPECT_EQ(spec.train.objective.a_diag, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(spec.train.gain.theta, 0.5);
  ASSERT_EQ(spec.train.elastic.size(), 2u);
  EXPECT_EQ(spec.train.elastic[1].start_tau, 50.0);
  EXPECT_EQ(spec.train.elastic[1].S, 8);
  EXPECT_EQ(spec.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  ASSERT_TRUE(spec.sweep);
  EXPECT_EQ(spec.sweep->theta.size(), 3u);
  EXPECT_EQ(parse_spec(serialize_spec(spec)), spec);

  auto lr = parse_spec(base() +
                       "schedule.milestones = 10, 20\nsweep.axis = lr_grid\n"
                       "sweep.eta0 = 0.1, 0.2\nsweep.d = 0.5\n");
  EXPECT_EQ(lr.sweep->size(), 2u);
  EXPECT_EQ(parse_spec(serialize_spec(lr)), lr);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_spec(base() + "run.bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_spec(base() + "run.S = 8\n"), ConfigError);
  EXPECT_THROW(parse_spec("objective.kind\n"), ConfigError);
  const auto both = parse_spec(base() + "run.T = 10\n");
  EXPECT_THROW(both.validate(), ConfigError);
  auto empty = parse_spec(base() + "sweep.axis = S\n");
  EXPECT_THROW(empty.validate(), ConfigError);
  EXPECT_THROW(load_spec("/nonexistent/adascale.cfg"), ConfigError);
  EXPECT_THROW(parse_seed_list("1,x"), ConfigError);
}

TEST(Config, ThetaExpressions) {
  EXPECT_DOUBLE_EQ(eval_theta("1-S/100", 32), 0.68);
  EXPECT_DOUBLE_EQ(eval_theta("1-S/1000", 8), 0.992);
  EXPECT_EQ(eval_theta("max(1-S/10,0)", 32), 0.0);
  EXPECT_DOUBLE_EQ(eval_theta("max(1-S/10,0)", 8), 0.2);
  EXPECT_EQ(eval_theta("0.25", 8), 0.25);
  EXPECT_THROW(eval_theta("S/2", 8), ConfigError);
  EXPECT_THROW(eval_theta("1-S/10", 32), ConfigError);
}

TEST(Train, WritesTracesAndSummary) {
  TempDir dir;
  auto spec = parse_spec(base());
  spec.out_dir = dir.path;
  spec.seeds = {1, 2, 3, 4, 5};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(spec, quiet(out, err)), kSuccess) << err.str();
  for (int s = 1; s <= 5; ++s) {
    const auto p = dir.path / ("trace_seed" + std::to_string(s) + ".csv");
    ASSERT_TRUE(fs::exists(p));
    EXPECT_EQ(slurp(p).rfind("# seed=" + std::to_string(s) + "\n", 0), 0u);
  }
  const auto summary = slurp(dir.path / "summary.txt");
  EXPECT_NE(summary.find("runs = 5"), std::string::npos);
  EXPECT_NE(summary.find("final_F.mean = "), std::string::npos);
  EXPECT_NE(summary.find("final_F.std = "), std::string::npos);
  EXPECT_NE(summary.find("config.run.T_SI = 100"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path / "summary.txt.tmp"));
}

TEST(Train, RerunsAreByteIdentical) {
  TempDir a, b;
  auto spec = parse_spec(base());
  spec.seeds = {7};
  std::ostringstream out, err;
  spec.out_dir = a.path;
  ASSERT_EQ(cmd_train(spec, quiet(out, err)), kSuccess);
  spec.out_dir = b.path;
  CommandOptions threaded = quiet(out, err);
  threaded.threads = 3;
  ASSERT_EQ(cmd_train(spec, threaded), kSuccess);
  EXPECT_EQ(slurp(a.path / "trace_seed7.csv"), slurp(b.path / "trace_seed7.csv"));
}

TEST(Train, DivergedRunsReportNotAvailable) {
  TempDir dir;
  auto spec = parse_spec(base() + "gain.theta = 0\n");
  spec.train.schedule.eta0 = 5.0;
  spec.out_dir = dir.path;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(spec, quiet(out, err)), kSuccess);
  const auto summary = slurp(dir.path / "summary.txt");
  EXPECT_NE(summary.find("final_F.mean = N/A"), std::string::npos);
  EXPECT_NE(summary.find("status = diverged"), std::string::npos);
}

TEST(Sweep, ScaleAxisReducesIterations) {
  TempDir dir;
  auto spec = parse_spec(base("2, 2") + "sweep.axis = S\n"
                                              "sweep.S = 1, 4, 16\n");
  spec.out_dir = dir.path;
  spec.seeds = {1, 2};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(spec, quiet(out, err)), kSuccess) << err.str();
  const auto rows = csv_rows(dir.path / "matrix.csv");
  ASSERT_EQ(rows.size(), 4u);
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  EXPECT_EQ(header, kMatrixHeader);
  double prev = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double T = std::stod(rows[i][7]);
    EXPECT_LE(T, prev);
    prev = T;
  }
  EXPECT_TRUE(fs::exists(dir.path / "point_2" / "summary.txt"));
}

TEST(Sweep, ThetaAxisAndEmptyAxis) {
  TempDir dir;
  auto spec = parse_spec(base() + "sweep.axis = theta\n"
                                              "sweep.theta = 0, 1-S/100, 1-S/1000\n");
  spec.out_dir = dir.path;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(spec, quiet(out, err)), kSuccess) << err.str();
  const auto rows = csv_rows(dir.path / "matrix.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(std::stod(rows[1][2]), 0.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[2][2]), 0.96);
  EXPECT_DOUBLE_EQ(std::stod(rows[3][2]), 0.996);

  auto empty = parse_spec(base() + "sweep.axis = theta\n");
  empty.out_dir = dir.path / "empty";
  EXPECT_EQ(cmd_sweep(empty, quiet(out, err)), kUsage);
}

TEST(GainCompare, DeterministicObjectiveGivesUnitGains) {
  TempDir dir;
  auto spec = parse_spec(base("0, 0") + "compare.every = 10\n"
                                              "compare.batches = 50\n");
  spec.out_dir = dir.path;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_gain_compare(spec, quiet(out, err)), kSuccess) << err.str();
  const auto rows = csv_rows(dir.path / "gain_compare_seed1.csv");
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "tau", "online", "oracle", "analytic"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i][2]), 1.0);
    EXPECT_EQ(std::stod(rows[i][3]), 1.0);
    EXPECT_EQ(std::stod(rows[i][4]), 1.0);
  }

  TempDir sparse;
  spec.out_dir = sparse.path;
  spec.compare_every = 1000;
  ASSERT_EQ(cmd_gain_compare(spec, quiet(out, err)), kSuccess);
  const auto one = csv_rows(sparse.path / "gain_compare_seed1.csv");
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[1][0], "0");
}

TEST(GainCompare, NonAnalyticObjectiveMarksColumn) {
  TempDir dir;
  auto spec = parse_spec("objective.kind = logistic\nschedule.eta0 = 0.1\nrun.algorithm = adascale\n"
                         "run.S = 4\nrun.T_SI = 20\ncompare.every = 5\ncompare.batches = 20\n");
  spec.out_dir = dir.path;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_gain_compare(spec, quiet(out, err)), kSuccess) << err.str();
  const auto rows = csv_rows(dir.path / "gain_compare_seed1.csv");
  ASSERT_GE(rows.size(), 2u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][4], "NA");
}

TEST(Verify, UnknownSuiteIsUsageError) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify("nope", quiet(out, err)), kUsage);
}
