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

#include "builders.hpp"
#include "metronome/oracle.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace metronome {
namespace {

using std::numbers::pi;
using testing::MakeCluster;
using testing::MakeJob;

constexpr double kB = 25e9;

std::vector<WorkloadSpec> Workloads(std::vector<JobSpec> jobs) {
  std::vector<WorkloadSpec> ws;
  for (auto &j : jobs) ws.push_back(testing::Single(std::move(j)));
  return testing::Ordered(std::move(ws));
}

TEST(OracleSolve, LightJobIsColocated) {
  const ClusterSpec c = MakeCluster(2, 4.0, kB, 5.0);
  const auto ws = Workloads({MakeJob("j", 2, 0.1, 0.3, 0.1 * kB)});
  const OracleResult r = OracleSolve(c, ws, 72, {});
  EXPECT_EQ(r.placement.NodeOf("j-0"), r.placement.NodeOf("j-1"));
  // Upper-triangle pairs: 1 + 1 + 1 + 1 together, 1 + 5 + 1 apart.
  Placement split(c);
  split.Place(ws[0].jobs[0].tasks[0], 0);
  split.Place(ws[0].jobs[0].tasks[1], 1);
  EXPECT_EQ(WorkloadLatency(split, ws[0], c.latency), 7.0);
  EXPECT_EQ(r.objectives.lambda, 4.0);
  // Four node pairs plus leaving the job out.
  EXPECT_EQ(r.placements_evaluated, 5u);
}

TEST(OracleSolve, IncompatibleJobsGetTheirOwnLinks) {
  const ClusterSpec c = MakeCluster(2, 4.0, kB);
  const auto ws = Workloads({MakeJob("a", 1, 0.1, 0.6, kB, Priority::kHigh), MakeJob("b", 1, 0.1, 0.6, kB)});
  const OracleResult r = OracleSolve(c, ws, 72, {});
  EXPECT_NE(r.placement.NodeOf("a-0"), r.placement.NodeOf("b-0"));
  EXPECT_TRUE(r.schemes.empty());
  EXPECT_NEAR(r.objectives.gamma, 0.6, 1e-9);
}

TEST(OracleSolve, ForcedSharingSpreadsTheRotations) {
  const ClusterSpec c = MakeCluster(1, 2.0, kB);
  const auto ws = Workloads({MakeJob("a", 1, 0.1, 0.25, kB, Priority::kHigh), MakeJob("b", 1, 0.1, 0.25, kB)});
  const OracleResult r = OracleSolve(c, ws, 72, {});
  ASSERT_EQ(r.schemes.size(), 1u);
  EXPECT_EQ(r.schemes.at(0).index.at("b-0"), 36);
  EXPECT_NEAR(r.objectives.psi, pi, 1e-12);
  EXPECT_NEAR(r.objectives.gamma, 0.5, 1e-9);
}

TEST(OracleSolveRotations, KeepsTheGivenPlacement) {
  const ClusterSpec c = MakeCluster(2, 4.0, kB);
  const auto ws = Workloads({MakeJob("a", 1, 0.1, 0.2, kB, Priority::kHigh), MakeJob("b", 1, 0.1, 0.2, kB),
                             MakeJob("c", 1, 0.1, 0.2, kB)});
  Placement p(c);
  for (const auto &w : ws) p.Place(w.jobs[0].tasks[0], 0);
  const OracleResult r = OracleSolveRotations(c, ws, p, 72, {});
  EXPECT_EQ(r.placement, p);
  EXPECT_NEAR(r.objectives.psi, 2 * pi / 3, 1e-12);
}

TEST(OracleSolve, RefusesLargeInstances) {
  const ClusterSpec c = MakeCluster(5, 4.0, kB);
  const auto ws = Workloads({MakeJob("a", 1, 0.1, 0.2, kB)});
  try {
    OracleSolve(c, ws, 72, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInstanceTooLarge);
  }
}

TEST(OracleSolve, JobThatNeverFitsStaysOut) {
  const ClusterSpec c = MakeCluster(1, 1.0, kB);
  const auto ws = Workloads({MakeJob("a", 2, 0.1, 0.2, kB)});
  const OracleResult r = OracleSolve(c, ws, 72, {});
  EXPECT_FALSE(r.placement.NodeOf("a-0"));
  EXPECT_EQ(r.objectives.gamma, 0.0);
  EXPECT_EQ(r.placements_evaluated, 1u);
}

}  // namespace
}  // namespace metronome
