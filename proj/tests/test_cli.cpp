#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "balance/report.hpp"
#include "balance/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace balance;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("balance_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    std::mt19937_64 gen(91);
    io::write_blnc(path("pool.blnc"), support::random_tensor(20, 40, 3, gen, 0.1));
    io::write_blnc(path("ref.blnc"), support::random_tensor(20, 15, 3, gen));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(BALANCE_CLI_PATH) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string select_args(const std::string& config, const std::string& out) const {
    return "select --pool-tensor " + path("pool.blnc") + " --ref-tensor " + path("ref.blnc") + " --config " +
           path(config) + " --out " + path(out);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SelectWritesDistinctBatch) {
  write("c.json", R"({"B": 10, "K": 10, "M": 500, "epsilon": 0.2, "seed": 3})");
  ASSERT_EQ(run(select_args("c.json", "batch.json")), 0) << read("stderr");
  const auto batch = batch_from_json(read("batch.json"));
  EXPECT_EQ(batch.selected.size(), 10u);
  EXPECT_EQ(std::set<std::size_t>(batch.selected.begin(), batch.selected.end()).size(), 10u);
  for (std::size_t x : batch.selected) EXPECT_LT(x, 40u);
  EXPECT_EQ(batch.tau, 0.05);
  EXPECT_EQ(batch.seed, 3u);
}

TEST_F(Cli, SelectIsByteIdenticalAcrossRuns) {
  write("c.json", R"({"B": 6, "K": 10, "M": 400, "epsilon": 0.1, "seed": 5})");
  ASSERT_EQ(run(select_args("c.json", "a.json")), 0);
  ASSERT_EQ(run(select_args("c.json", "b.json")), 0);
  EXPECT_EQ(read("a.json"), read("b.json"));
  ASSERT_EQ(run("select --pool-tensor " + path("pool.blnc") + " --ref-tensor " + path("ref.blnc") + " --config " +
                path("c.json")),
            0);
  EXPECT_EQ(read("stdout"), read("a.json"));
}

TEST_F(Cli, ExitCodes) {
  write("big.json", R"({"B": 41, "K": 10})");
  EXPECT_EQ(run(select_args("big.json", "x.json")), 3);
  write("pairs.json", R"({"B": 2, "K": 11})");
  EXPECT_EQ(run(select_args("pairs.json", "x.json")), 3);
  write("unknown.json", R"({"B": 2, "batch": 3})");
  EXPECT_EQ(run(select_args("unknown.json", "x.json")), 3);
  write("bad.blnc", "BLNC\x01garbage");
  write("c.json", R"({"B": 2, "K": 5})");
  EXPECT_EQ(run("select --pool-tensor " + path("bad.blnc") + " --ref-tensor " + path("ref.blnc") + " --config " +
                path("c.json")),
            2);
  EXPECT_EQ(run("select --pool-tensor " + path("missing.blnc") + " --ref-tensor " + path("ref.blnc")), 2);
  EXPECT_EQ(run("simulate --scenario cifar10"), 3);
  EXPECT_EQ(run("select --pool-tensor"), 3);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, SimulateWritesCurve) {
  write("c.json", R"({"algorithm": "random", "B": 10, "K": 5, "budget": 30})");
  ASSERT_EQ(run("simulate --scenario synthetic-dirichlet --config " + path("c.json") + " --out-curve " +
                path("curve.csv")),
            0)
      << read("stderr");
  const auto curve = curve_from_csv(read("curve.csv"));
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_EQ(curve.back().labels, 30u);
  ASSERT_EQ(run("simulate --scenario stylized-n64 --out-curve " + path("s.csv")), 0);
  EXPECT_EQ(curve_from_csv(read("s.csv")).back().labels, 3u);
}

TEST_F(Cli, OracleFixtures) {
  const std::string fixture = std::string(BALANCE_FIXTURE_DIR) + "/small.json";
  for (const char* op : {"balance-vs-bruteforce", "recurrence-vs-naive", "ec2-vs-eced"}) {
    ASSERT_EQ(run("oracle --fixture " + fixture + " --op " + op + " --out " + path("r.json")), 0) << op;
    const auto report = nlohmann::json::parse(read("r.json"));
    EXPECT_EQ(report.at("op"), op);
    EXPECT_TRUE(report.at("pass").get<bool>());
    EXPECT_GT(report.at("cases").get<std::size_t>(), 0u);
  }
  EXPECT_EQ(run("oracle --fixture " + std::string(BALANCE_FIXTURE_DIR) + "/corrupted.json --op ec2-vs-eced"), 2);
  EXPECT_EQ(run("oracle --fixture " + fixture + " --op nonsense"), 3);
}

TEST_F(Cli, DiagnoseCv) {
  write("c.json", R"({"K": 10})");
  ASSERT_EQ(run("diagnose cv --pool-tensor " + path("pool.blnc") + " --ref-tensor " + path("ref.blnc") +
                " --repeats 3 --config " + path("c.json") + " --out " + path("cv.csv")),
            0)
      << read("stderr");
  const auto csv = read("cv.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 41);
  EXPECT_EQ(run("diagnose cv --pool-tensor " + path("pool.blnc") + " --ref-tensor " + path("ref.blnc") +
                " --repeats 1"),
            3);
}
