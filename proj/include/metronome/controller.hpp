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

// Stop-and-wait controller: global time-shift composition, offline rotation
// recalculation and continuous regulation of drifting jobs.

#pragma once

#include "metronome/link_search.hpp"
#include "metronome/metrics.hpp"
#include "metronome/model.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace metronome {

struct AffinityEdge {
  std::string job_id;
  std::size_t node = 0;
  double shift = 0.0;  // the job's relative shift in the link's scheme
  double t_l = 0.0;
};

/// Bipartite job/link graph with one edge per contention incidence.
struct AffinityGraph {
  std::vector<std::string> jobs;
  std::map<std::string, PriorityKey> priority;
  std::vector<AffinityEdge> edges;
};

AffinityGraph BuildAffinityGraph(const Placement &placement, const ClusterSpec &cluster,
                                 const std::map<std::size_t, RotationScheme> &schemes);

struct GlobalOffsets {
  std::map<std::string, double> job;   // seconds
  std::map<std::string, double> task;  // every task of a job shares its shift
  // BFS tree: the job each job was reached from and over which link.
  std::map<std::string, std::string> parent;
  std::map<std::string, std::size_t> parent_link;
  std::vector<std::string> references;  // one per component
};

/// Breadth-first composition from the highest-priority job of each
/// component. Throws kCycleDetected if a job is reached twice.
GlobalOffsets GlobalOffset(const AffinityGraph &graph,
                           const Placement *placement = nullptr);

/// Stage-three rotation search over one link's sharing set.
RotationScheme OfflineRecalculate(std::span<const TaskSpec> sharing, std::size_t node,
                                  double capacity, int di_pre, const PeriodParams &params,
                                  RecalcSearch mode = RecalcSearch::kExhaustive,
                                  const RotationScheme *current = nullptr,
                                  std::uint64_t max_enumeration = std::uint64_t{1} << 22);

struct MonitorParams {
  double a_t = 1.10;
  int o_t = 5;
  int window = 10;
};

class MonitorState {
 public:
  MonitorState(double baseline, MonitorParams params);

  double baseline() const { return baseline_; }
  const MonitorParams &params() const { return params_; }
  const std::deque<double> &window() const { return window_; }
  void Push(double duration);
  int SlowCount() const;
  void Clear() { window_.clear(); }

 private:
  double baseline_;
  MonitorParams params_;
  std::deque<double> window_;
};

struct MonitorAction {
  bool pause = false;
  double realign = 0.0;  // seconds of delay before the next communication
};

/// Records the iteration and decides whether a low-priority task must pause.
/// realign = (assigned_shift − observed_phase) mod t_l. The window is cleared
/// after a pause so the same samples do not trigger again.
MonitorAction MonitorTick(MonitorState &state, double duration, Priority priority,
                          double assigned_shift = 0.0, double observed_phase = 0.0,
                          double t_l = 0.0);

enum class PatternDecision { kUnchanged, kRecalibrate };

/// Recalibrate when the observed period or duty cycle deviates from the
/// declared one by more than e_t (relative), or after 3 pauses within the
/// last three windows.
PatternDecision DetectPatternChange(const TaskSpec &declared, double observed_period,
                                    double observed_duty, int recent_pauses, double e_t);

/// Non-negative remainder of x modulo m.
double PositiveMod(double x, double m);

}  // namespace metronome
