#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace relupgd::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("relupgd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "relupgd");
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, GenThenSolve) {
  const std::string data = path("data.json");
  ASSERT_EQ(call({"gen", "--d", "20", "--sparsity", "2", "--n", "200", "--seed", "3", "--out", data}), kExitOk);
  EXPECT_TRUE(fs::exists(data));
  ASSERT_EQ(call({"solve", "--data", data, "--constraint", "l1", "--trace-out", path("trace.csv")}), kExitOk);
  EXPECT_NE(out_.str().find("\"final_rel_err\""), std::string::npos);
  EXPECT_EQ(slurp(path("trace.csv")).rfind("tau,rel_err,loss,contraction\n", 0), 0u);
}

TEST_F(CliTest, GenToStdoutIsDeterministic) {
  ASSERT_EQ(call({"gen", "--d", "4", "--n", "3", "--seed", "1"}), kExitOk);
  const std::string first = out_.str();
  ASSERT_EQ(call({"gen", "--d", "4", "--n", "3", "--seed", "1"}), kExitOk);
  EXPECT_EQ(first, out_.str());
  EXPECT_NE(first.find("\"w_star\""), std::string::npos);
}

TEST_F(CliTest, Width) {
  ASSERT_EQ(call({"width", "--d", "100", "--sparsity", "5", "--samples", "2000"}), kExitOk);
  EXPECT_NE(out_.str().find("\"omega_sq_analytic\":20.38998"), std::string::npos);
}

TEST_F(CliTest, SweepWritesCsvAndJson) {
  const auto cfg = write("sweep.json", R"({"d": 20, "s": 2, "n_grid": ["x2", "x6"], "seeds": 2, "max_iters": 20})");
  ASSERT_EQ(call({"sweep", "--config", cfg, "--out", path("sweep.csv")}), kExitOk);
  const std::string csv = slurp(path("sweep.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_TRUE(fs::exists(path("sweep.json")));
}

TEST_F(CliTest, Rate) {
  const auto cfg = write("rate.json", R"({"d": 20, "s": 2, "n_grid": ["x8"], "seeds": 3, "max_iters": 10})");
  ASSERT_EQ(call({"rate", "--config", cfg}), kExitOk);
  EXPECT_EQ(out_.str().rfind("tau,mean_rel_err,p95_rel_err\n", 0), 0u);
}

TEST_F(CliTest, VerifyPassAndGatedFailure) {
  const auto ok = write("ri.json", R"({"cone": "subspace", "d": 3, "s": 1, "n": 50, "delta": 0.9, "trials": 20})");
  EXPECT_EQ(call({"verify", "--check", "ri", "--config", ok, "--out", path("r.json")}), kExitOk);
  EXPECT_NE(slurp(path("r.json")).find("\"check_name\": \"restricted_isometry\""), std::string::npos);

  // A first-iterate radius that far exceeds what 8 n0 samples deliver: gated, and it fails.
  const auto bad = write("fi.json", R"({"d": 60, "s": 3, "n_multiple": 8, "trials": 10})");
  EXPECT_EQ(call({"verify", "--check", "first-iter", "--config", bad}), kExitCheckFailed);
}

TEST_F(CliTest, ConfigErrors) {
  EXPECT_EQ(call({}), kExitConfigError);
  EXPECT_EQ(call({"frobnicate"}), kExitConfigError);
  EXPECT_EQ(call({"gen", "--d", "4"}), kExitConfigError);
  EXPECT_EQ(call({"sweep", "--config", path("missing.json"), "--out", path("x.csv")}), kExitConfigError);
  const auto unknown = write("u.json", R"({"n_grid": [10], "seeds": 1, "bogus": true})");
  EXPECT_EQ(call({"sweep", "--config", unknown, "--out", path("x.csv")}), kExitConfigError);
  EXPECT_NE(err_.str().find("bogus"), std::string::npos);
  const auto thin = write("thin.json", R"({"cone": "subspace", "d": 10, "s": 5, "n": 10, "delta": 0.5})");
  EXPECT_EQ(call({"verify", "--check", "ri", "--config", thin}), kExitConfigError);
  EXPECT_NE(err_.str().find("sampling-condition-unmet"), std::string::npos);
}

TEST_F(CliTest, DivergenceExitCode) {
  const std::string data = path("d.json");
  ASSERT_EQ(call({"gen", "--d", "10", "--n", "30", "--out", data}), kExitOk);
  EXPECT_EQ(call({"solve", "--data", data, "--step", "1000", "--iters", "400"}), kExitDiverged);
}

}  // namespace
}  // namespace relupgd::cli
