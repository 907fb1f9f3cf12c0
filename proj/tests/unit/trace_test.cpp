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

#include "metronome/trace.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace metronome {
namespace {

double LoadMean(const std::vector<LoadSample> &p, double from, double to) {
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double a = std::max(p[k].time, from);
    const double b = std::min(p[k + 1].time, to);
    if (b > a) area += p[k].load * (b - a);
  }
  return area / (to - from);
}

TEST(GenerateTrace, ZeroLoadIsEmpty) {
  TraceParams p;
  p.load_low = 0.0;
  p.load_high = 0.0;
  const Trace t = GenerateTrace(3, p, DefaultCluster());
  EXPECT_TRUE(t.workloads.empty());
  EXPECT_EQ(t.seed, 3u);
}

TEST(GenerateTrace, DefaultsRespectHorizonAndDurations) {
  const TraceParams p;
  const Trace t = GenerateTrace(42, p, DefaultCluster());
  ASSERT_FALSE(t.workloads.empty());
  double last = 0.0;
  for (const auto &w : t.workloads) {
    EXPECT_GE(w.arrival, last);
    EXPECT_LT(w.arrival, 300.0);
    last = w.arrival;
    for (const auto &j : w.jobs) {
      const double len = j.low_comm() ? j.duration : j.iterations * j.tasks.front().period;
      // Rounding to whole iterations moves the length by at most half a period.
      const double slack = j.low_comm() ? 0.0 : 0.5 * j.tasks.front().period + 1e-9;
      EXPECT_GE(len, 37.5 - slack) << j.id;
      EXPECT_LE(len, 112.5 + slack) << j.id;
      for (const auto &task : j.tasks) {
        if (task.low_comm) continue;
        EXPECT_GT(task.duty_cycle, 0.0);
        EXPECT_LT(task.duty_cycle, 1.0);
        EXPECT_GT(task.bandwidth, 0.0);
      }
    }
  }
}

TEST(GenerateTrace, SameSeedSameTrace) {
  const Trace a = GenerateTrace(9, {}, DefaultCluster());
  const Trace b = GenerateTrace(9, {}, DefaultCluster());
  ASSERT_EQ(a.workloads.size(), b.workloads.size());
  for (std::size_t k = 0; k < a.workloads.size(); ++k) {
    EXPECT_EQ(a.workloads[k].arrival, b.workloads[k].arrival);
    EXPECT_EQ(a.workloads[k].jobs[0].id, b.workloads[k].jobs[0].id);
    EXPECT_EQ(a.workloads[k].jobs[0].iterations, b.workloads[k].jobs[0].iterations);
  }
  const Trace c = GenerateTrace(10, {}, DefaultCluster());
  EXPECT_FALSE(c.workloads.size() == a.workloads.size() &&
               c.workloads.front().arrival == a.workloads.front().arrival);
}

TEST(GenerateTrace, LoadStaysInsideTheBand) {
  const TraceParams p;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trace t = GenerateTrace(seed, p, DefaultCluster());
    const auto profile = LoadProfile(t, DefaultCluster());
    for (const auto &s : profile) EXPECT_LE(s.load, p.load_high + 1e-12) << seed;
    // After one maximum job length the cluster has filled up.
    EXPECT_GE(LoadMean(profile, p.max_duration, p.horizon), p.load_low) << seed;
  }
}

TEST(GenerateTrace, TargetAboveCapacityIsInfeasible) {
  TraceParams p;
  p.load_high = 1.2;
  try {
    GenerateTrace(1, p, DefaultCluster());
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleLoad);
  }
}

TEST(GenerateTrace, BandTooNarrowForAnyJobIsInfeasible) {
  TraceParams p;
  p.load_low = 0.0;
  p.load_high = 0.05;  // under one GPU of thirteen
  EXPECT_THROW(GenerateTrace(1, p, DefaultCluster()), Error);
}

TEST(GenerateTrace, UnorderedBandIsRejected) {
  TraceParams p;
  p.load_low = 0.9;
  p.load_high = 0.5;
  EXPECT_THROW(GenerateTrace(1, p, DefaultCluster()), Error);
}

TEST(DefaultCluster, FourNodesThirteenGpus) {
  const ClusterSpec c = DefaultCluster();
  ASSERT_EQ(c.size(), 4u);
  double gpus = 0.0;
  for (const auto &n : c.nodes) gpus += n.capacity.gpu;
  EXPECT_EQ(gpus, 13.0);
  EXPECT_EQ(c.nodes[3].link_bandwidth, 10e9);
}

TEST(DefaultCatalog, EveryEntryIsUsable) {
  for (const auto &m : DefaultCatalog()) {
    EXPECT_GE(m.tasks, 1) << m.name;
    if (m.low_comm) continue;
    EXPECT_GT(m.period, 0.0) << m.name;
    EXPECT_GT(m.duty_cycle, 0.0) << m.name;
    EXPECT_LT(m.duty_cycle, 1.0) << m.name;
    EXPECT_LE(m.bandwidth, 25e9) << m.name;
  }
}

TEST(LoadProfile, CountsGpusOfRunningJobs) {
  const Trace t = GenerateTrace(5, {}, DefaultCluster());
  const auto profile = LoadProfile(t, DefaultCluster());
  ASSERT_FALSE(profile.empty());
  EXPECT_EQ(profile.back().load, 0.0);
  EXPECT_GT(profile.front().load, 0.0);
}

}  // namespace
}  // namespace metronome
