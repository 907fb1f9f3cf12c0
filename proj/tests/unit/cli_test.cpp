// Copyright 2026 The Metronome Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

const std::string kCli = METRONOME_CLI;
const std::string kConfigs = METRONOME_EXAMPLES_DIR;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path Scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "metronome-cli-test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Exec(const std::string &args) {
  static int counter = 0;
  const fs::path err = fs::temp_directory_path() / ("metronome-cli-err-" + std::to_string(counter++));
  Outcome r;
  FILE *pipe = popen((kCli + " " + args + " 2>" + err.string()).c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = Slurp(err);
  fs::remove(err);
  return r;
}

fs::path WriteFile(const fs::path &dir, const std::string &name, const std::string &text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::size_t DataRows(const std::string &csv) {
  std::size_t lines = 0;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++lines;
  }
  return lines - 1;  // column header
}

TEST(GenTrace, SameSeedSameFile) {
  const fs::path dir = Scratch("gen");
  ASSERT_EQ(Exec("gen-trace --seed 42 --out " + (dir / "a.json").string()).code, 0);
  ASSERT_EQ(Exec("gen-trace --seed 42 --out " + (dir / "b.json").string()).code, 0);
  EXPECT_EQ(Slurp(dir / "a.json"), Slurp(dir / "b.json"));
  EXPECT_EQ(Json::parse(Slurp(dir / "a.json"))["seed"], 42);
}

TEST(GenTrace, ZeroLoadGivesAnEmptyTrace) {
  const Outcome r = Exec("gen-trace --seed 3 --load-low 0 --load-high 0");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(Json::parse(r.out)["workloads"].empty());
}

TEST(GenTrace, SummaryStaysInsideTheBand) {
  const fs::path dir = Scratch("band");
  const Outcome r = Exec("gen-trace --seed 5 --out " + (dir / "t.json").string());
  ASSERT_EQ(r.code, 0);
  const auto peak = r.out.find("peak_load=");
  ASSERT_NE(peak, std::string::npos);
  EXPECT_LE(std::stod(r.out.substr(peak + 10)), 0.85);
}

TEST(GenTrace, ImpossibleLoadExitsTwo) {
  const Outcome r = Exec("gen-trace --seed 1 --load-high 1.5");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"], "InfeasibleLoad");
}

TEST(Schedule, ReferenceTaskHasZeroShift) {
  const Outcome r = Exec("schedule --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                     "/snapshot-pair.yaml");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  ASSERT_EQ(doc["schemes"].size(), 1u);
  const std::string ref = doc["schemes"][0]["reference"];
  EXPECT_EQ(ref, "vgg16-0");
  EXPECT_EQ(doc["shifts"][ref], 0.0);
  EXPECT_NEAR(doc["shifts"]["vgg19-0"].get<double>(), 0.1, 1e-12);
}

TEST(Schedule, LowCommWorkloadHasNoShifts) {
  const fs::path dir = Scratch("lowcomm");
  const fs::path w = WriteFile(dir, "w.yaml",
                               "workloads:\n"
                               "  - id: w\n"
                               "    jobs:\n"
                               "      - id: alexnet\n"
                               "        duration: 30\n"
                               "        replicas: 2\n"
                               "        template: {low_comm: true, cpu: 4, mem: 16Gi, gpu: 1}\n");
  const Outcome r = Exec("schedule --cluster " + kConfigs + "/single-node.yaml --workloads " + w.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  EXPECT_TRUE(doc["shifts"].empty());
  EXPECT_TRUE(doc["schemes"].empty());
}

TEST(Schedule, OversubscribedClusterExitsThree) {
  const fs::path dir = Scratch("over");
  const fs::path w = WriteFile(dir, "w.yaml",
                               "workloads:\n"
                               "  - id: w\n"
                               "    jobs:\n"
                               "      - id: big\n"
                               "        iterations: 10\n"
                               "        replicas: 5\n"
                               "        template: {period: 100ms, duty_cycle: 0.2, bandwidth: 1Gbps, "
                               "cpu: 1, mem: 1G, gpu: 1}\n");
  const Outcome r = Exec("schedule --cluster " + kConfigs + "/single-node.yaml --workloads " + w.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(Json::parse(r.out)["jobs"][0]["accepted"]);
}

TEST(Schedule, InvalidParameterExitsTwoWithJson) {
  const Outcome r = Exec("schedule --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                     "/snapshot-pair.yaml --di-pre 0");
  EXPECT_EQ(r.code, 2);
  const Json e = Json::parse(r.err);
  EXPECT_TRUE(e.contains("error"));
  EXPECT_TRUE(e.contains("message"));
  EXPECT_TRUE(r.out.empty());
}

TEST(Schedule, MissingFileIsAConfigError) {
  const Outcome r = Exec("schedule --cluster /nonexistent/cluster.yaml --workloads " + kConfigs +
                     "/snapshot-pair.yaml");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"], "ConfigError");
}

TEST(Recalc, SkippedLinkPrintsANotice) {
  const Outcome r = Exec("recalc --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                     "/snapshot-pair.yaml");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("skip_phase_three=1"), std::string::npos);
  EXPECT_TRUE(Json::parse(r.out)["recalculated"].empty());
}

TEST(Simulate, ByteIdenticalAcrossRuns) {
  const fs::path a = Scratch("sim-a");
  const fs::path b = Scratch("sim-b");
  const std::string args = "simulate --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                           "/snapshot-pair.yaml --sigma 0.02 --seed 9 --out ";
  ASSERT_EQ(Exec(args + a.string()).code, 0);
  ASSERT_EQ(Exec(args + b.string()).code, 0);
  for (const char *f : {"report.json", "iterations.csv", "utilization.csv", "jobs.csv", "summary.csv",
                        "readjustments.csv"}) {
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
    EXPECT_FALSE(Slurp(a / f).empty()) << f;
  }
}

TEST(Compare, SchedulerOrderDoesNotChangeRuns) {
  const fs::path a = Scratch("cmp-a");
  const fs::path b = Scratch("cmp-b");
  const std::string args = "compare --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                           "/snapshot-pair.yaml --seed 4 --out ";
  ASSERT_EQ(Exec(args + a.string() + " --schedulers agnostic,metronome").code, 0);
  ASSERT_EQ(Exec(args + b.string() + " --schedulers metronome,agnostic").code, 0);
  EXPECT_EQ(Slurp(a / "report-agnostic.json"), Slurp(b / "report-agnostic.json"));
  EXPECT_EQ(Slurp(a / "report-metronome.json"), Slurp(b / "report-metronome.json"));
}

TEST(Report, MergesRowsOfEveryRun) {
  std::string inputs;
  std::size_t rows = 0;
  for (const char *s : {"metronome", "agnostic", "exclusive"}) {
    const fs::path dir = Scratch(std::string("rep-") + s);
    ASSERT_EQ(Exec("simulate --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                   "/snapshot-pair.yaml --scheduler " + s + " --out " + dir.string())
                  .code,
              0);
    rows += DataRows(Slurp(dir / "iterations.csv"));
    inputs += " " + (dir / "report.json").string();
  }
  const fs::path out = Scratch("rep-out");
  ASSERT_EQ(Exec("report" + inputs + " --out " + out.string()).code, 0);
  EXPECT_EQ(DataRows(Slurp(out / "iterations.csv")), rows);
  EXPECT_EQ(DataRows(Slurp(out / "summary.csv")), 3u);
}

TEST(Oracle, SolvesTheSnapshotPair) {
  const Outcome r = Exec("oracle --cluster " + kConfigs + "/single-node.yaml --workloads " + kConfigs +
                     "/snapshot-pair.yaml");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(Json::parse(r.out).is_object());
}

TEST(Usage, UnknownSubcommandExitsTwo) {
  EXPECT_EQ(Exec("frobnicate").code, 2);
}

}  // namespace
