/*
 * Copyright 2026 The xcfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Drives the built `xcfed` executable end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "json.hpp"
#include "xcfed/csv.h"
#include "xcfed/report.h"

namespace xcfed {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
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

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("xcfed_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome xcfed(const std::string& args) {
    const std::string cmd = std::string(XCFED_BINARY) + " " + args + " > " +
                            (dir_ / "stdout").string() + " 2> " + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(dir_ / "stdout");
    o.err = slurp(dir_ / "stderr");
    return o;
  }

  fs::path write_config(const json& doc, const std::string& name = "exp.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  static json small_doc(std::size_t rounds = 10) {
    return json{
        {"version", "1"},
        {"defaults",
         {{"seed", 5},
          {"rounds", rounds},
          {"lr", 0.1},
          {"data", {{"samples", 200}, {"features", 4}, {"classes", 3}, {"separation", 3.0}}},
          {"fleet",
           {{"partition", {{"kind", "dirichlet"}, {"beta", 0.5}}},
            {"platforms",
             json::array({{{"compute_rate", 2.0},
                           {"link", {{"latency_ms", 10.0}, {"bandwidth_bytes_per_ms", 500.0}}}},
                          {{"compute_rate", 1.0},
                           {"link", {{"latency_ms", 30.0}, {"bandwidth_bytes_per_ms", 200.0}}}}})}}},
          {"strategy", {{"kind", "fedavg"}}}}},
        {"entries", json::array({{{"name", "fed"}},
                                 {{"name", "grad"}, {"strategy", {{"kind", "gradient"}}}}})}};
  }

  fs::path dir_;
};

TEST_F(CliTest, MissingConfigIsUsageErrorAndWritesNothing) {
  const auto o = xcfed("run " + (dir_ / "nope.json").string() + " --out " +
                       (dir_ / "out").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("not found"), std::string::npos) << o.err;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, InvalidConfigIsUsageErrorNamingTheField) {
  auto doc = small_doc();
  doc["defaults"]["rounds"] = "ten";
  const auto cfg = write_config(doc);
  auto o = xcfed("run " + cfg.string() + " --out " + (dir_ / "out").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("rounds"), std::string::npos) << o.err;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
  o = xcfed("validate " + cfg.string());
  EXPECT_EQ(o.code, 2);
  std::ofstream(dir_ / "broken.json") << "{\"version\": ";
  EXPECT_EQ(xcfed("validate " + (dir_ / "broken.json").string()).code, 2);
}

TEST_F(CliTest, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(xcfed("").code, 2);
  EXPECT_EQ(xcfed("frobnicate").code, 2);
  EXPECT_EQ(xcfed("run").code, 2);
  EXPECT_EQ(xcfed("--help").code, 0);
}

TEST_F(CliTest, ValidateAcceptsBundledBenchmark) {
  const auto o = xcfed(std::string("validate ") + XCFED_SOURCE_DIR + "/configs/benchmark.json");
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("4 entries"), std::string::npos) << o.out;
}

TEST_F(CliTest, RunWritesOneRowPerRoundReproducibly) {
  const auto cfg = write_config(small_doc(10));
  ASSERT_EQ(xcfed("run " + cfg.string() + " --out " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(xcfed("run " + cfg.string() + " --out " + (dir_ / "b").string()).code, 0);
  for (const std::string name : {"fed", "grad"}) {
    const std::string csv = slurp(dir_ / "a" / (name + ".metrics.csv"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11) << name;
    EXPECT_EQ(csv.rfind(metrics_csv_header(2) + "\n", 0), 0u);
    EXPECT_EQ(csv, slurp(dir_ / "b" / (name + ".metrics.csv")));
    const json s = json::parse(slurp(dir_ / "a" / (name + ".summary.json")));
    EXPECT_EQ(s["rounds"], 10);
    EXPECT_EQ(s["time_basis"], "simulated");
    EXPECT_EQ(s["config"]["seed"], 5);
  }
  // A seed override changes the data and hence the output.
  ASSERT_EQ(
      xcfed("run " + cfg.string() + " --out " + (dir_ / "c").string() + " --seed 6").code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "fed.metrics.csv"), slurp(dir_ / "c" / "fed.metrics.csv"));
  EXPECT_EQ(json::parse(slurp(dir_ / "c" / "fed.summary.json"))["seed"], 6);
}

TEST_F(CliTest, CompareFollowsRequestedOrderAndMatchesSummaries) {
  const auto cfg = write_config(small_doc(6));
  const std::string out = (dir_ / "out").string();
  ASSERT_EQ(xcfed("run " + cfg.string() + " --out " + out).code, 0);
  const auto o = xcfed("compare --out " + out + " grad fed");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out.rfind("Times are simulated", 0), 0u);
  EXPECT_LT(o.out.find("| grad |"), o.out.find("| fed |"));

  std::istringstream rows(slurp(dir_ / "out" / "compare.csv"));
  std::string line;
  std::getline(rows, line);
  for (const std::string name : {"grad", "fed"}) {
    ASSERT_TRUE(std::getline(rows, line));
    const auto cells = csv::split(line, ',');
    ASSERT_EQ(cells.at(0), name);
    const auto s = summary_from_json(json::parse(slurp(dir_ / "out" / (name + ".summary.json"))));
    EXPECT_EQ(csv::parse_double(cells.at(1)), static_cast<double>(s.cumulative_bytes) / 1e6);
    EXPECT_EQ(csv::parse_double(cells.at(2)), s.total_simulated_ms / 3.6e6);
    EXPECT_EQ(csv::parse_double(cells.at(3)), s.final_accuracy * 100.0);
    EXPECT_EQ(csv::parse_double(cells.at(4)), s.final_loss);
  }

  const auto missing = xcfed("compare --out " + out + " fed ghost");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("ghost"), std::string::npos);
}

TEST_F(CliTest, SweepRunsOneEntryPerValue) {
  auto doc = small_doc(5);
  doc["entries"] = json::array({{{"name", "fed"}}});
  const auto cfg = write_config(doc);
  const std::string out = (dir_ / "sweep").string();
  const auto o =
      xcfed("sweep " + cfg.string() + " --param lr --values 0.05,0.1,0.3 --out " + out);
  ASSERT_EQ(o.code, 0) << o.err;
  for (const std::string v : {"0.05", "0.1", "0.3"}) {
    EXPECT_TRUE(fs::exists(dir_ / "sweep" / ("fed-lr-" + v + ".summary.json"))) << v;
    EXPECT_NE(o.out.find("| fed-lr-" + v + " |"), std::string::npos) << v;
  }
  // The value equal to the base config reproduces a plain run.
  ASSERT_EQ(xcfed("run " + cfg.string() + " --out " + (dir_ / "base").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "sweep" / "fed-lr-0.1.metrics.csv"),
            slurp(dir_ / "base" / "fed.metrics.csv"));
}

TEST_F(CliTest, SweepCompressionReducesUploadBytes) {
  auto doc = small_doc(5);
  doc["entries"] = json::array({{{"name", "g"}, {"strategy", {{"kind", "gradient"}}}}});
  const auto cfg = write_config(doc);
  const std::string out = (dir_ / "sweep").string();
  ASSERT_EQ(xcfed("sweep " + cfg.string() + " --param k_fraction --values 1.0,0.1 --out " + out)
                .code,
            0);
  const auto full = json::parse(slurp(dir_ / "sweep" / "g-k_fraction-1.0.summary.json"));
  const auto sparse = json::parse(slurp(dir_ / "sweep" / "g-k_fraction-0.1.summary.json"));
  EXPECT_LT(sparse["upload_bytes"].get<std::uint64_t>(), full["upload_bytes"].get<std::uint64_t>());
}

TEST_F(CliTest, SweepRejectsUnknownParameterAndBadValues) {
  const auto cfg = write_config(small_doc(3));
  const std::string out = (dir_ / "sweep").string();
  auto o = xcfed("sweep " + cfg.string() + " --param momentum --values 1 --out " + out);
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("momentum"), std::string::npos);
  EXPECT_EQ(xcfed("sweep " + cfg.string() + " --param lr --values abc --out " + out).code, 2);
  EXPECT_EQ(xcfed("sweep " + cfg.string() + " --param alpha0 --values 0.5 --out " + out).code,
            2);
  EXPECT_FALSE(fs::exists(dir_ / "sweep"));
}

}  // namespace
}  // namespace xcfed
