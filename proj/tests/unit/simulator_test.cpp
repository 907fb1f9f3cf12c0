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
#include "metronome/simulator.hpp"

#include <gtest/gtest.h>

namespace metronome {
namespace {

using testing::MakeCluster;
using testing::MakeJob;

constexpr double kB = 25e9;
constexpr double kPeriod = 0.2;

Trace TraceOf(std::vector<JobSpec> jobs, std::uint64_t seed = 7) {
  std::vector<WorkloadSpec> ws;
  for (auto &j : jobs) ws.push_back(testing::Single(std::move(j)));
  return {seed, testing::Ordered(std::move(ws))};
}

SimulationConfig Config(SimScheduler s, double sigma = 0.0) {
  SimulationConfig c;
  c.scheduler = s;
  c.sigma = sigma;
  return c;
}

// Two single-task jobs that would communicate at the same instant.
Trace AlignedPair(std::int64_t iterations = 100) {
  return TraceOf({MakeJob("hi", 1, kPeriod, 0.5, kB, Priority::kHigh, iterations),
                  MakeJob("lo", 1, kPeriod, 0.5, kB, Priority::kLow, iterations)});
}

TEST(Simulate, LoneJobRunsAtItsPeriod) {
  const auto r = Simulate(TraceOf({MakeJob("j", 2, kPeriod, 0.3, kB)}), MakeCluster(2, 4.0, kB),
                          Config(SimScheduler::kMetronome));
  const JobReport &j = r.jobs.front();
  ASSERT_EQ(j.iterations.size(), 100u);
  EXPECT_NEAR(j.mean_iteration, kPeriod, 1e-9);
  EXPECT_NEAR(j.per_1000, 1000 * kPeriod, 1e-6);
  EXPECT_NEAR(j.completion_time, 100 * kPeriod, 1e-6);
  EXPECT_EQ(r.pause_count, 0);
}

TEST(Simulate, DeliversEveryDeclaredBit) {
  const auto r = Simulate(TraceOf({MakeJob("j", 1, kPeriod, 0.3, 0.4 * kB, Priority::kLow, 50)}),
                          MakeCluster(1, 4.0, kB), Config(SimScheduler::kMetronome, 0.05));
  const double bits = r.links[0].utilization * kB * r.tct;
  EXPECT_NEAR(bits, 50 * 0.4 * kB * kPeriod * 0.3, 1e-6 * bits);
}

TEST(Simulate, AgnosticPairSharesTheLinkEveryIteration) {
  const auto r = Simulate(AlignedPair(), MakeCluster(1, 4.0, kB), Config(SimScheduler::kAgnostic));
  // Both flows get half the link: comm doubles from 0.1 to 0.2.
  EXPECT_NEAR(r.FindJob("hi")->mean_iteration, 1.5 * kPeriod, 1e-9);
  EXPECT_NEAR(r.FindJob("lo")->mean_iteration, 1.5 * kPeriod, 1e-9);
  EXPECT_NEAR(r.tct, 100 * 1.5 * kPeriod, 1e-6);
}

TEST(Simulate, MetronomeInterleavesThePair) {
  const auto r = Simulate(AlignedPair(), MakeCluster(1, 4.0, kB), Config(SimScheduler::kMetronome));
  EXPECT_NEAR(r.FindJob("hi")->mean_iteration, kPeriod, 1e-9);
  EXPECT_NEAR(r.FindJob("lo")->mean_iteration, kPeriod, 1e-9);
  EXPECT_EQ(r.FindJob("hi")->pauses, 0);
  EXPECT_NEAR(r.FindJob("lo")->iteration_start[0] - r.FindJob("hi")->iteration_start[0], 0.5 * kPeriod,
              1e-9);
  EXPECT_EQ(r.pause_count, 0);
}

TEST(Simulate, MetronomeFinishesSoonerThanAgnostic) {
  const auto c = CompareSchedulers(AlignedPair(), MakeCluster(1, 4.0, kB), Config(SimScheduler::kAgnostic),
                                   {SimScheduler::kAgnostic, SimScheduler::kMetronome});
  // 100 iterations at 0.3 s against a half-period head start plus 100 at 0.2 s.
  EXPECT_NEAR(c.rows[0].tct, 30.0, 1e-6);
  EXPECT_NEAR(c.rows[1].tct, 20.1, 1e-6);
  EXPECT_NEAR(c.rows[1].tct_delta, (20.1 - 30.0) / 30.0, 1e-9);
}

TEST(Simulate, IdealMatchesMetronomeWithoutContention) {
  const Trace t = AlignedPair(40);
  const auto m = Simulate(t, MakeCluster(1, 4.0, kB), Config(SimScheduler::kMetronome));
  const auto i = Simulate(t, MakeCluster(1, 4.0, kB), Config(SimScheduler::kIdeal));
  ASSERT_EQ(i.jobs.size(), m.jobs.size());
  for (std::size_t k = 0; k < m.jobs.size(); ++k) {
    EXPECT_EQ(i.jobs[k].iterations.size(), m.jobs[k].iterations.size());
    EXPECT_NEAR(i.jobs[k].mean_iteration, m.jobs[k].mean_iteration, 1e-9);
  }
  EXPECT_EQ(i.gamma, 0.0);
  EXPECT_TRUE(i.links.empty());
}

TEST(Simulate, Deterministic) {
  const Trace t = TraceOf({MakeJob("a", 2, kPeriod, 0.35, kB, Priority::kHigh, 200),
                           MakeJob("b", 2, kPeriod, 0.35, kB, Priority::kLow, 200)},
                          11);
  const auto x = Simulate(t, MakeCluster(2, 4.0, kB), Config(SimScheduler::kMetronome, 0.02));
  const auto y = Simulate(t, MakeCluster(2, 4.0, kB), Config(SimScheduler::kMetronome, 0.02));
  ASSERT_EQ(x.jobs.size(), y.jobs.size());
  for (std::size_t k = 0; k < x.jobs.size(); ++k) EXPECT_EQ(x.jobs[k].iterations, y.jobs[k].iterations);
  EXPECT_EQ(x.pause_count, y.pause_count);
  EXPECT_EQ(x.tct, y.tct);
}

TEST(Simulate, SeedChangesTheDrift) {
  Trace t = TraceOf({MakeJob("a", 1, kPeriod, 0.35, kB, Priority::kLow, 50)}, 1);
  const auto x = Simulate(t, MakeCluster(1, 4.0, kB), Config(SimScheduler::kAgnostic, 0.05));
  t.seed = 2;
  const auto y = Simulate(t, MakeCluster(1, 4.0, kB), Config(SimScheduler::kAgnostic, 0.05));
  EXPECT_NE(x.jobs[0].iterations, y.jobs[0].iterations);
}

Trace FourFifths() {
  std::vector<JobSpec> jobs;
  for (int k = 0; k < 4; ++k) {
    jobs.push_back(MakeJob("j" + std::to_string(k), 1, kPeriod, 0.2, kB,
                           k == 0 ? Priority::kHigh : Priority::kLow, 50));
  }
  return TraceOf(std::move(jobs));
}

int AcceptedOnArrival(const SimulationReport &r) {
  int n = 0;
  for (const auto &j : r.jobs) n += j.accepted_on_arrival ? 1 : 0;
  return n;
}

TEST(Simulate, ExclusiveAdmitsOneFullRateJob) {
  SimulationConfig c = Config(SimScheduler::kExclusive);
  c.retry_rejected = false;
  const auto r = Simulate(FourFifths(), MakeCluster(1, 4.0, kB), c);
  EXPECT_EQ(AcceptedOnArrival(r), 1);
  int rejected = 0;
  for (const auto &a : r.admissions) rejected += a.accepted ? 0 : 1;
  EXPECT_EQ(rejected, 3);
}

TEST(Simulate, MetronomeAdmitsAllFourAndKeepsThemApart) {
  const auto r = Simulate(FourFifths(), MakeCluster(1, 4.0, kB), Config(SimScheduler::kMetronome));
  EXPECT_EQ(AcceptedOnArrival(r), 4);
  for (const auto &j : r.jobs) EXPECT_NEAR(j.mean_iteration, kPeriod, 1e-9) << j.id;
  EXPECT_EQ(r.pause_count, 0);
}

TEST(Simulate, RetriedJobsRunAfterTheHolderLeaves) {
  const auto r = Simulate(FourFifths(), MakeCluster(1, 4.0, kB), Config(SimScheduler::kExclusive));
  for (const auto &j : r.jobs) EXPECT_TRUE(j.accepted) << j.id;
  EXPECT_NEAR(r.tct, 4 * 50 * kPeriod, 1e-6);
}

TEST(Simulate, CongestedLinkSlowsTheJob) {
  SimulationConfig c = Config(SimScheduler::kAgnostic);
  c.background.push_back({0, 0.5 * kB, 0.0, 1e9});
  const auto r = Simulate(TraceOf({MakeJob("j", 1, kPeriod, 0.5, kB)}), MakeCluster(1, 4.0, kB), c);
  EXPECT_NEAR(r.jobs[0].mean_iteration, 0.3, 1e-9);
}

TEST(Simulate, DriftingLowPriorityJobGetsRegulated) {
  SimulationConfig c = Config(SimScheduler::kMetronome, 0.0);
  c.pattern_changes.push_back({5.0, "lo", 0.8, 0.0});
  const auto r = Simulate(AlignedPair(200), MakeCluster(1, 4.0, kB), c);
  bool recalibrated = false;
  for (const auto &a : r.readjustments) recalibrated |= a.action == "recalibrate" && a.job_id == "lo";
  EXPECT_TRUE(recalibrated);
  EXPECT_EQ(r.FindJob("hi")->pauses, 0);
}

TEST(Simulate, RejectsBadConfig) {
  SimulationConfig c;
  c.tick = 0.0;
  EXPECT_THROW(Simulate(AlignedPair(), MakeCluster(1, 4.0, kB), c), Error);
  c = SimulationConfig{};
  c.sigma = -1.0;
  EXPECT_THROW(Simulate(AlignedPair(), MakeCluster(1, 4.0, kB), c), Error);
}

TEST(SimScheduler, NamesRoundTrip) {
  for (auto s : {SimScheduler::kMetronome, SimScheduler::kAgnostic, SimScheduler::kExclusive,
                 SimScheduler::kLatencyOnly, SimScheduler::kIdeal}) {
    EXPECT_EQ(ParseSimScheduler(ToString(s)), s);
  }
  EXPECT_THROW(ParseSimScheduler("fifo"), Error);
}

TEST(MeanIteration, WeightsByIterationCount) {
  SimulationReport r;
  JobReport a;
  a.priority = Priority::kLow;
  a.iterations = {1.0, 1.0, 1.0};
  JobReport b = a;
  b.iterations = {3.0};
  r.jobs = {a, b};
  EXPECT_DOUBLE_EQ(MeanIteration(r, Priority::kLow), 1.5);
  EXPECT_EQ(MeanIteration(r, Priority::kHigh), 0.0);
}

}  // namespace
}  // namespace metronome
