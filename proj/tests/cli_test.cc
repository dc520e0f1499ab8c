// Copyright 2026 The qlbi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sys/wait.h>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qlbi/cli/commands.h"
#include "qlbi/cli/run_config.h"

namespace qlbi::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"qlbi"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qlbi_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST(Config, DefaultRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(emit_config(parse_config(emit_config(c))), emit_config(c));
}

TEST(Config, EditedRoundTrip) {
  RunConfig c;
  c.aperture.r = 0.75;
  c.basis.kind = "gaussian-hg";
  c.basis.K = 5;
  c.scene.theta = 0.123456789;
  c.protocol.M = 7;
  c.protocol.measurement = "individual";
  c.seed = 18446744073709551557ull;
  c.chart.modes = {3};
  c.chart.theta = {0.02, 0.3, 7};
  c.estimate.sampling = "full";
  c.output.path = "x/y.csv";
  EXPECT_EQ(parse_config(emit_config(c)), c);
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto c = parse_config(R"({"schema_version": 1, "aperture": {"r": 3.5}})");
  RunConfig expected;
  expected.aperture.r = 3.5;
  EXPECT_EQ(c, expected);
}

TEST(Config, RejectsMalformedDocuments) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"aperture": {"r": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 99})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "aperture": {"r": "two"}})"), ConfigError);
}

TEST(Config, ValidationCatchesRanges) {
  const auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    EXPECT_THROW(validate_config(c), ConfigError);
  };
  bad([](RunConfig& c) { c.aperture.r = -1.0; });
  bad([](RunConfig& c) { c.basis.K = 0; });
  bad([](RunConfig& c) { c.basis.kind = "zernike"; });
  bad([](RunConfig& c) { c.protocol.M = 0; });
  bad([](RunConfig& c) { c.chart.theta.steps = 0; });
  bad([](RunConfig& c) { c.chart.modes.clear(); });
  bad([](RunConfig& c) { c.simulate.mode = "slow"; });
  bad([](RunConfig& c) { c.estimate.trials = 10; });
  EXPECT_NO_THROW(validate_config(RunConfig{}));
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  RunConfig c;
  c.seed = 5;
  c.scene.theta = 0.2;
  c.aperture.r = 1.0;
  write_atomic(path("run.json"), emit_config(c));
  const auto o = run({"simulate", "--config", path("run.json"), "--seed", "9", "--r", "3", "--print-config"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto eff = parse_config(o.out);
  EXPECT_EQ(eff.seed, 9u);
  EXPECT_EQ(eff.aperture.r, 3.0);
  EXPECT_EQ(eff.scene.theta, 0.2);
}

TEST_F(CliTest, ChartRowCountMatchesGrid) {
  const auto o = run({"chart", "--out", path("chart.csv")});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream in(slurp(path("chart.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "theta_over_sigma,r,K,cfi,qfi,ratio");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 25 * 11 * 4);
}

TEST_F(CliTest, ChartIsByteIdenticalOnRerun) {
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto o = run({"chart", "--theta-steps", "6", "--r-steps", "3", "--modes", "1,2", "--threads", "2",
                        "--out", path(name)});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_FALSE(slurp(path("a.csv")).empty());
}

TEST(Cli, EmptyGridIsConfigError) {
  const auto o = run({"chart", "--theta-steps", "0"});
  EXPECT_EQ(o.code, kExitConfig);
  EXPECT_NE(o.err.find("config error"), std::string::npos);
}

TEST(Cli, BadFlagsAreConfigErrors) {
  EXPECT_EQ(run({"chart", "--no-such-flag"}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"simulate", "--mode", "turbo"}).code, kExitConfig);
  EXPECT_EQ(run({"chart", "--config", "/nonexistent/run.json"}).code, kExitConfig);
}

TEST(Cli, NumericalFailureExitsThree) {
  // One mode cannot resolve a pair exactly one Rayleigh angle apart.
  const auto o = run({"chart", "--theta-min", "1", "--theta-max", "1", "--theta-steps", "1", "--r-min", "2",
                      "--r-max", "2", "--r-steps", "1", "--modes", "1"});
  EXPECT_EQ(o.code, kExitNumerical);
  EXPECT_FALSE(o.err.empty());
}

TEST_F(CliTest, SimulateWithoutPhotonsFlagsUndefinedTv) {
  const auto o = run({"simulate", "--photons", "0", "--out", path("trace.jsonl")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_FALSE(j.at("tv_defined").get<bool>());
  EXPECT_TRUE(j.at("tv").is_null());
  EXPECT_EQ(j.at("analytic").size(), 4u);
  EXPECT_EQ(slurp(path("trace.jsonl")), "");
}

TEST_F(CliTest, SimulateTraceIsDeterministic) {
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    const auto o = run({"simulate", "--photons", "200", "--seed", "77", "--out", path(name)});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  const auto a = slurp(path("a.jsonl"));
  EXPECT_EQ(a, slurp(path("b.jsonl")));
  std::istringstream in(a);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto rec = nlohmann::json::parse(line);
    EXPECT_TRUE(rec.contains("stages"));
    EXPECT_TRUE(rec.at("sign") == 1 || rec.at("sign") == -1);
    ++n;
  }
  EXPECT_EQ(n, 200);
}

TEST(Cli, SimulateDefaultMatchesAnalyticLaw) {
  const auto o = run({"simulate"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto j = nlohmann::json::parse(o.out);
  EXPECT_EQ(j.at("photons").get<int>(), 100000);
  EXPECT_LE(j.at("tv").get<double>(), 0.01);
}

TEST_F(CliTest, EstimateIsDeterministic) {
  for (const char* tag : {"a", "b"}) {
    const auto o = run({"estimate", "--photons", "500", "--trials", "30", "--seed", "3", "--out",
                        path(std::string(tag) + ".json"), "--trials-csv", path(std::string(tag) + ".csv")});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  const auto j = nlohmann::json::parse(slurp(path("a.json")));
  EXPECT_EQ(j.at("trials").get<int>(), 30);
  EXPECT_EQ(j.at("seed").get<int>(), 3);
}

TEST(Cli, EstimateNeedsEqualBrightness) {
  RunConfig c;
  c.scene.brightness = 0.3;
  std::ostringstream out;
  EXPECT_THROW(cmd_estimate(c, out), ConfigError);
}

TEST(Cli, ValidatePassesOnPristineBuild) {
  const auto o = run({"validate"});
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("all checks passed"), std::string::npos);
  EXPECT_NE(o.out.find("PASS enumerate-vs-analytic"), std::string::npos);
  EXPECT_NE(o.out.find("max_dev="), std::string::npos);
}

TEST(Cli, ValidateCatchesInjectedSignFault) {
  const auto o = run({"validate", "--inject-fault", "f-sign"});
  EXPECT_EQ(o.code, kExitNumerical);
  EXPECT_NE(o.out.find("FAIL enumerate-vs-analytic"), std::string::npos);
  EXPECT_EQ(run({"validate", "--inject-fault", "nonsense"}).code, kExitConfig);
}

TEST_F(CliTest, AtomicWriteReplacesWithoutLeftovers) {
  const auto p = path("out.txt");
  write_atomic(p, "first");
  write_atomic(p, "second");
  EXPECT_EQ(slurp(p), "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir_)) ++entries;
  EXPECT_EQ(entries, 1);
  EXPECT_THROW(write_atomic(path("missing/dir/out.txt"), "x"), std::runtime_error);
}

TEST_F(CliTest, InstalledBinaryRuns) {
  const std::string cmd = std::string(QLBI_CLI_PATH) + " chart --theta-steps 2 --r-steps 2 --modes 2 --out " +
                          path("bin.csv") + " > /dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_FALSE(slurp(path("bin.csv")).empty());
  const std::string bad = std::string(QLBI_CLI_PATH) + " chart --theta-steps 0 > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  EXPECT_EQ(WEXITSTATUS(status), kExitConfig);
}

}  // namespace
}  // namespace qlbi::cli
