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
#include "metronome/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace metronome {
namespace {

using std::numbers::pi;
using testing::MakeTask;

constexpr double kTol = 1e-9;

AngularInterval Around(double mid, double len = 0.2) { return {WrapAngle(mid - len / 2), len}; }

TEST(UnifyPeriods, ExactMultipleUsesLcm) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.1, 0.2, 1, Priority::kHigh, 0),
                           MakeTask("b", "b", 0.2, 0.2, 1, Priority::kLow, 1)};
  const UnifiedPeriod u = UnifyPeriods(ts, {});
  EXPECT_NEAR(u.t_l, 0.2, kTol);
  EXPECT_EQ(u.at("a").mul, 2);
  EXPECT_EQ(u.at("b").mul, 1);
  EXPECT_EQ(u.at("a").injected_idle, 0.0);
  EXPECT_EQ(u.at("b").injected_idle, 0.0);
  EXPECT_FALSE(u.approximate);
}

TEST(UnifyPeriods, CloseMultiplesAreAveraged) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.100, 0.2, 1, Priority::kHigh, 0),
                           MakeTask("b", "b", 0.103, 0.2, 1, Priority::kLow, 1)};
  const UnifiedPeriod u = UnifyPeriods(ts, {0.005, 0.10});
  EXPECT_NEAR(u.t_l, 0.1015, kTol);
  EXPECT_NEAR(u.at("a").effective_period, 0.1015, kTol);
  EXPECT_NEAR(u.at("b").effective_period, 0.1015, kTol);
}

TEST(UnifyPeriods, LargerGapInjectsIdleIntoLowPriority) {
  std::vector<TaskSpec> ts{MakeTask("h", "h", 0.200, 0.3, 1, Priority::kHigh, 0),
                           MakeTask("l", "l", 0.185, 0.3, 1, Priority::kLow, 1)};
  const UnifiedPeriod u = UnifyPeriods(ts, {0.005, 0.10});
  EXPECT_NEAR(u.t_l, 0.200, kTol);
  EXPECT_NEAR(u.at("l").injected_idle, 0.015, kTol);
  EXPECT_EQ(u.at("h").injected_idle, 0.0);
  // Communication time is kept: the duty cycle drops to m / 200 ms.
  const CircleAbstraction c = Abstract(ts[1], u);
  EXPECT_NEAR(c.alpha, kTwoPi * (0.185 * 0.3) / 0.200, kTol);
}

TEST(UnifyPeriods, GapBeyondIdleBoundIsIncompatible) {
  std::vector<TaskSpec> ts{MakeTask("h", "h", 0.200, 0.3, 1, Priority::kHigh, 0),
                           MakeTask("l", "l", 0.150, 0.3, 1, Priority::kLow, 1)};
  PeriodParams p{0.005, 0.10, 1};
  try {
    UnifyPeriods(ts, p);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIncompatible);
  }
  EXPECT_NO_THROW(UnifyPeriodsOrFallback(ts, p));
}

TEST(UnifyPeriods, NeverInjectsIdleIntoTheHighestPriorityTask) {
  for (double lo : {0.180, 0.185, 0.190, 0.196, 0.210}) {
    std::vector<TaskSpec> ts{MakeTask("h", "h", 0.200, 0.3, 1, Priority::kHigh, 0),
                             MakeTask("l", "l", lo, 0.3, 1, Priority::kLow, 1)};
    const UnifiedPeriod u = UnifyPeriodsOrFallback(ts, {});
    EXPECT_EQ(u.at("h").injected_idle, 0.0) << lo;
    for (const auto &[id, tp] : u.tasks) EXPECT_NEAR(tp.mul * tp.effective_period, u.t_l, kTol);
  }
}

TEST(Abstract, HalfDutyIsHalfCircle) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.1, 0.5, 1)};
  const CircleAbstraction c = Abstract(ts[0], UnifyPeriods(ts, {}));
  EXPECT_NEAR(c.alpha, pi, kTol);
  const auto iv = c.CommIntervals();
  ASSERT_EQ(iv.size(), 1u);
  EXPECT_NEAR(iv[0].start, 0.0, kTol);
  EXPECT_NEAR(iv[0].length, pi, kTol);
  EXPECT_EQ(c.rotation, 0.0);
}

TEST(Abstract, TwoRepetitionsAtQuarterDuty) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.1, 0.25, 1, Priority::kHigh, 0),
                           MakeTask("b", "b", 0.2, 0.1, 1, Priority::kLow, 1)};
  const CircleAbstraction c = Abstract(ts[0], UnifyPeriods(ts, {}));
  EXPECT_EQ(c.mul, 2);
  EXPECT_NEAR(c.alpha, pi / 4, kTol);
  const auto iv = c.CommIntervals();
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_NEAR(iv[0].start, 0.0, kTol);
  EXPECT_NEAR(iv[1].start, pi, kTol);
  EXPECT_NEAR(iv[1].start + iv[1].length, 5 * pi / 4, kTol);
}

TEST(Abstract, ZeroDutyHasNoDemand) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.1, 0.0, 1e9)};
  const CircleAbstraction c = Abstract(ts[0], UnifyPeriods(ts, {}));
  EXPECT_EQ(c.alpha, 0.0);
  std::vector<CircleAbstraction> cs{c};
  EXPECT_EQ(DemandProfile(cs).Integral(), 0.0);
}

std::vector<CircleAbstraction> Pair(double alpha, double rot_b) {
  CircleAbstraction a{"a", "a", 1, alpha, 0.0, 10e9};
  CircleAbstraction b{"b", "b", 1, alpha, rot_b, 10e9};
  return {a, b};
}

TEST(DemandProfile, IdenticalIntervalsSuperpose) {
  const auto cs = Pair(pi / 2, 0.0);
  const AngularProfile p = DemandProfile(cs);
  EXPECT_EQ(p.ValueAt(0.5), 20e9);
  EXPECT_EQ(p.ValueAt(2.0), 0.0);
}

TEST(DemandProfile, OppositeRotationGivesDisjointPieces) {
  const auto cs = Pair(pi / 2, pi);
  const AngularProfile p = DemandProfile(cs);
  EXPECT_EQ(p.ValueAt(0.5), 10e9);
  EXPECT_EQ(p.ValueAt(pi + 0.5), 10e9);
  EXPECT_EQ(p.ValueAt(2.0), 0.0);
  for (double v : p.values) EXPECT_LE(v, 10e9);
}

// Brute force: the demand sum evaluated pointwise with modular arithmetic.
double Sampled(const std::vector<CircleAbstraction> &cs, double theta) {
  double sum = 0.0;
  for (const auto &c : cs) {
    const double rep = kTwoPi / c.mul;
    const double local = std::fmod(std::fmod(theta - c.rotation, rep) + rep, rep);
    if (local < c.alpha) sum += c.bandwidth;
  }
  return sum;
}

std::vector<CircleAbstraction> Mixed() {
  return {{"a", "a", 1, 0.9, 0.3, 7e9},
          {"b", "b", 2, 0.8, 1.1, 5e9},
          {"c", "c", 3, 0.5, 0.05, 3e9}};
}

TEST(DemandProfile, MatchesPointwiseSamplingOfMixedMultiplicities) {
  const auto cs = Mixed();
  const AngularProfile p = DemandProfile(cs);
  int checked = 0;
  for (int k = 0; k < 10000; ++k) {
    const double theta = kTwoPi * (k + 0.5) / 10000;
    bool near_edge = false;
    for (double b : p.breakpoints) near_edge |= std::abs(b - theta) < 1e-9;
    if (near_edge) continue;
    ASSERT_EQ(p.ValueAt(theta), Sampled(cs, theta)) << theta;
    ++checked;
  }
  EXPECT_EQ(checked, 10000);
  // 2 + 2·2 + 2·3 distinct arc endpoints plus the origin.
  EXPECT_EQ(p.breakpoints.size(), 13u);
}

TEST(DemandProfile, MassIsConserved) {
  const auto cs = Mixed();
  double expected = 0.0;
  for (const auto &c : cs) expected += c.bandwidth * c.mul * c.alpha;
  EXPECT_NEAR(DemandProfile(cs).Integral(), expected, 1e-9 * expected);
}

TEST(DemandProfile, InvariantUnderOneRepetitionOfRotation) {
  auto cs = Mixed();
  const AngularProfile before = DemandProfile(cs);
  cs[1].rotation += kTwoPi / cs[1].mul;
  cs[2].rotation += 2 * kTwoPi / cs[2].mul;
  const AngularProfile after = DemandProfile(cs);
  for (int k = 0; k < 997; ++k) {
    const double theta = kTwoPi * (k + 0.37) / 997;
    EXPECT_EQ(before.ValueAt(theta), after.ValueAt(theta));
  }
}

TEST(Abstract, DutyCycleIsConservedOnTheCircle) {
  std::vector<TaskSpec> ts{MakeTask("a", "a", 0.05, 0.3, 1, Priority::kHigh, 0),
                           MakeTask("b", "b", 0.2, 0.45, 1, Priority::kLow, 1)};
  const UnifiedPeriod u = UnifyPeriods(ts, {});
  for (const auto &t : ts) {
    const CircleAbstraction c = Abstract(t, u);
    EXPECT_NEAR(c.mul * c.alpha, kTwoPi * t.duty_cycle, kTol);
  }
}

TEST(IntervalDistance, OppositeMidpoints) {
  EXPECT_NEAR(IntervalDistance(Around(0.0), Around(pi)), pi, kTol);
}

TEST(IntervalDistance, WrapsAround) {
  EXPECT_NEAR(IntervalDistance(Around(0.0), Around(3 * pi / 2)), pi / 2, kTol);
}

TEST(IntervalDistance, IdentityIsZero) {
  EXPECT_NEAR(IntervalDistance(Around(1.0), Around(1.0)), 0.0, kTol);
}

TEST(IntervalDistance, SymmetricAndTriangular) {
  const double mids[] = {0.1, 1.7, 3.0, 4.4, 6.2};
  for (double a : mids) {
    for (double b : mids) {
      EXPECT_NEAR(IntervalDistance(Around(a), Around(b)), IntervalDistance(Around(b), Around(a)), kTol);
      for (double c : mids) {
        EXPECT_LE(IntervalDistance(Around(a), Around(c)),
                  IntervalDistance(Around(a), Around(b)) + IntervalDistance(Around(b), Around(c)) + kTol);
      }
    }
  }
}

TEST(AngularInterval, HalfOpen) {
  const AngularInterval iv{1.0, 0.5};
  EXPECT_TRUE(iv.Contains(1.0));
  EXPECT_FALSE(iv.Contains(1.5));
}

}  // namespace
}  // namespace metronome
