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

// Unified-circle abstraction of periodic traffic. A link's tasks are mapped
// onto one circle whose perimeter is the common period T_l; each task's
// communication phase becomes mul_p arcs of angle alpha_p, rotated by θ.

#pragma once

#include "metronome/model.hpp"

#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace metronome {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps any angle into [0, 2π).
double WrapAngle(double theta);

struct PeriodParams {
  double g_t = 0.005;      // seconds
  double e_t = 0.10;       // fraction of the lower-priority task's period
  int max_lcm_factor = 64;  // T_l <= factor * longest period
};

struct TaskPeriod {
  int mul = 1;
  double injected_idle = 0.0;      // seconds added to each iteration
  double effective_period = 0.0;   // T_l / mul
};

struct UnifiedPeriod {
  double t_l = 0.0;
  std::map<std::string, TaskPeriod> tasks;
  // Set when no assignment met the thresholds and the bounded-LCM fallback
  // was used instead.
  bool approximate = false;

  const TaskPeriod &at(const std::string &task_id) const;
};

/// Chooses multiplicities (and idle injection) so every task repeats an
/// integral number of times on T_l. Throws kIncompatible when no assignment
/// keeps the gaps within the thresholds.
UnifiedPeriod UnifyPeriods(std::span<const TaskSpec> tasks,
                           const PeriodParams &params);

/// UnifyPeriods, falling back to the raw LCM bounded at max_lcm_factor (or
/// nearest multiples when the LCM exceeds the bound) instead of throwing.
UnifiedPeriod UnifyPeriodsOrFallback(std::span<const TaskSpec> tasks,
                                     const PeriodParams &params);

/// Half-open arc [start, start + length) on the circle; start in [0, 2π).
struct AngularInterval {
  double start = 0.0;
  double length = 0.0;

  double midpoint() const { return WrapAngle(start + 0.5 * length); }
  bool Contains(double theta) const;
};

struct CircleAbstraction {
  std::string task_id;
  std::string job_id;
  int mul = 1;
  double alpha = 0.0;     // communication angle per repetition
  double rotation = 0.0;  // θ_{l,p} in [0, 2π/mul)
  double bandwidth = 0.0;

  /// The mul arcs [2πi/mul, 2πi/mul + alpha) shifted by the rotation.
  std::vector<AngularInterval> CommIntervals() const;
  /// Indicator of the rotated communication set at θ.
  bool Communicating(double theta) const;
};

/// Builds the abstraction with the post-injection duty cycle
/// d = m_p / effective_period (communication duration is preserved).
CircleAbstraction Abstract(const TaskSpec &task, const UnifiedPeriod &unified);

/// Piecewise-constant aggregate demand. breakpoints[0] == 0 and piece k covers
/// [breakpoints[k], breakpoints[k+1]) (the last piece ends at 2π).
struct AngularProfile {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double width(std::size_t k) const;
  double ValueAt(double theta) const;
  /// ∫ over the circle.
  double Integral() const;
};

/// Exact aggregate-demand profile of the given rotated abstractions.
AngularProfile DemandProfile(std::span<const CircleAbstraction> circles);

/// Circular distance between the midpoints of two arcs, in [0, π].
double IntervalDistance(const AngularInterval &a, const AngularInterval &b);

}  // namespace metronome
