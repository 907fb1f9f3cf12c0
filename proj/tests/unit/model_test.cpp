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
#include "metronome/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace metronome {
namespace {

using testing::MakeCluster;
using testing::MakeJob;
using testing::MakeTask;

TEST(Placement, PlacingOneGpuTaskLeavesThree) {
  const ClusterSpec c = MakeCluster(1, 4.0, 25e9);
  Placement p(c);
  p.Place(MakeTask("a", "j", 0.1, 0.5, 1e9), 0);
  EXPECT_EQ(p.residual(0).gpu, 3.0);
  EXPECT_EQ(*p.NodeOf("a"), 0u);
}

TEST(Placement, JobWithOneOfTwoTasksIsNotDeployed) {
  const ClusterSpec c = MakeCluster(2, 4.0, 25e9);
  Placement p(c);
  WorkloadSpec w = testing::Single(MakeJob("j", 2, 0.1, 0.5, 1e9));
  p.RegisterWorkload(w);
  p.Place(w.jobs[0].tasks[0], 0);
  EXPECT_FALSE(p.JobDeployed("j"));
  EXPECT_FALSE(p.WorkloadDeployed(w.id));
}

TEST(Placement, WorkloadDeployedWhenEveryJobIs) {
  const ClusterSpec c = MakeCluster(2, 4.0, 25e9);
  Placement p(c);
  WorkloadSpec w;
  w.id = "w";
  w.jobs = {MakeJob("a", 2, 0.1, 0.5, 1e9), MakeJob("b", 1, 0.1, 0.5, 1e9)};
  std::vector<WorkloadSpec> ws{w};
  AssignSubmitOrder(ws);
  p.RegisterWorkload(ws[0]);
  for (const auto &j : ws[0].jobs) {
    for (const auto &t : j.tasks) {
      p.Place(t, 0);
      EXPECT_LE(p.WorkloadDeployed("w"), p.JobDeployed(j.id));
    }
  }
  EXPECT_TRUE(p.JobDeployed("a"));
  EXPECT_TRUE(p.JobDeployed("b"));
  EXPECT_TRUE(p.WorkloadDeployed("w"));
}

TEST(Placement, OverCommitThrowsAndLeavesStateUnchanged) {
  const ClusterSpec c = MakeCluster(1, 1.0, 25e9);
  Placement p(c);
  p.Place(MakeTask("a", "j", 0.1, 0.5, 1e9), 0);
  const Placement before = p;
  try {
    p.Place(MakeTask("b", "k", 0.1, 0.5, 1e9), 0);
    FAIL() << "expected InsufficientResources";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientResources);
  }
  EXPECT_EQ(p, before);
}

TEST(Placement, ResidualPlusConsumedIsCapacity) {
  const ClusterSpec c = MakeCluster(2, 4.0, 25e9);
  Placement p(c);
  Resources used[2];
  int k = 0;
  for (int n : {0, 1, 0, 0, 1}) {
    TaskSpec t = MakeTask("t" + std::to_string(k++), "j", 0.1, 0.5, 1e9, Priority::kLow, k, 0.5);
    p.Place(t, n);
    used[n] += t.request;
  }
  p.Remove("t1");
  used[1] -= MakeTask("x", "j", 0.1, 0.5, 1e9, Priority::kLow, 0, 0.5).request;
  for (int n = 0; n < 2; ++n) {
    Resources sum = p.residual(n);
    sum += used[n];
    EXPECT_EQ(sum, p.capacity(n));
  }
}

TEST(Placement, SharingSetHoldsOnlyBandwidthTasks) {
  const ClusterSpec c = MakeCluster(1, 4.0, 25e9);
  Placement p(c);
  p.Place(MakeTask("a", "j", 0.1, 0.5, 1e9), 0);
  p.Place(testing::MakeLowComm("b", "k"), 0);
  EXPECT_EQ(p.TasksOn(0).size(), 2u);
  ASSERT_EQ(p.SharingSet(0).size(), 1u);
  EXPECT_EQ(p.SharingSet(0)[0].id, "a");
}

TEST(HighestPriority, HighBeatsLowRegardlessOfOrder) {
  std::vector<TaskSpec> s{MakeTask("l", "a", 0.1, 0.5, 1, Priority::kLow, 1),
                          MakeTask("h", "b", 0.1, 0.5, 1, Priority::kHigh, 2)};
  EXPECT_EQ(HighestPriorityTask(s).id, "h");
}

TEST(HighestPriority, EarlierSubmissionWinsAmongEquals) {
  std::vector<TaskSpec> s{MakeTask("h2", "a", 0.1, 0.5, 1, Priority::kHigh, 2),
                          MakeTask("h1", "b", 0.1, 0.5, 1, Priority::kHigh, 1)};
  EXPECT_EQ(HighestPriorityTask(s).id, "h1");
}

TEST(HighestPriority, SingletonIsItself) {
  std::vector<TaskSpec> s{MakeTask("l3", "a", 0.1, 0.5, 1, Priority::kLow, 3)};
  EXPECT_EQ(HighestPriorityTask(s).id, "l3");
}

TEST(HighestPriority, EmptySetThrows) {
  std::vector<TaskSpec> s;
  try {
    HighestPriorityTask(s);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptySet);
  }
}

TEST(HighestPriority, PermutationInvariant) {
  std::vector<TaskSpec> s{MakeTask("a", "a", 0.1, 0.5, 1, Priority::kLow, 4),
                          MakeTask("b", "b", 0.1, 0.5, 1, Priority::kHigh, 7),
                          MakeTask("c", "c", 0.1, 0.5, 1, Priority::kHigh, 5),
                          MakeTask("d", "d", 0.1, 0.5, 1, Priority::kLow, 1)};
  std::sort(s.begin(), s.end(), [](const auto &x, const auto &y) { return x.id < y.id; });
  do {
    EXPECT_EQ(HighestPriorityTask(s).id, "c");
  } while (std::next_permutation(s.begin(), s.end(),
                                 [](const auto &x, const auto &y) { return x.id < y.id; }));
}

TEST(ClusterSpec, RejectsAsymmetricLatency) {
  ClusterSpec c = MakeCluster(2, 4.0, 25e9);
  c.latency(0, 1) = 3.0;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(ClusterSpec, BMaxIsLargestLink) {
  ClusterSpec c;
  c.nodes = {testing::MakeNode("a", 4, 25e9), testing::MakeNode("b", 1, 10e9)};
  c.latency = Eigen::MatrixXd::Ones(2, 2);
  c.Finalize();
  EXPECT_EQ(c.b_max, 25e9);
}

TEST(SubmitOrder, MonotoneAndPropagatesPriority) {
  std::vector<WorkloadSpec> ws{testing::Single(MakeJob("a", 2, 0.1, 0.5, 1, Priority::kHigh)),
                               testing::Single(MakeJob("b", 1, 0.1, 0.5, 1))};
  ws[0].jobs[0].tasks[1].priority = Priority::kLow;
  AssignSubmitOrder(ws);
  EXPECT_EQ(ws[0].jobs[0].tasks[0].submit_order, 0);
  EXPECT_EQ(ws[0].jobs[0].tasks[1].submit_order, 1);
  EXPECT_EQ(ws[1].jobs[0].tasks[0].submit_order, 2);
  EXPECT_EQ(ws[0].jobs[0].tasks[1].priority, Priority::kHigh);
}

TEST(TaskSpec, DutyCycleOutsideUnitIntervalIsRejected) {
  TaskSpec t = MakeTask("a", "j", 0.1, 1.5, 1e9);
  EXPECT_THROW(t.Validate(), Error);
  t.duty_cycle = 0.5;
  t.period = 0.0;
  EXPECT_THROW(t.Validate(), Error);
}

}  // namespace
}  // namespace metronome
