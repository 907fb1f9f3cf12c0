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

// Event-driven fluid simulation of periodic training jobs on a cluster.
// Rates are piecewise constant between events; each host link shares its
// capacity max-min fairly among active flows, each capped at its demand.

#pragma once

#include "metronome/controller.hpp"
#include "metronome/model.hpp"
#include "metronome/scheduler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace metronome {

struct Trace {
  std::uint64_t seed = 0;
  std::vector<WorkloadSpec> workloads;  // arrival order
};

/// Extra traffic on a host link, e.g. a congested node.
struct BackgroundFlow {
  std::size_t node = 0;
  double rate = 0.0;  // bits/s demand
  double start = 0.0;
  double end = 0.0;
};

/// From `time` on the job really runs with the new pattern; the declared
/// spec is only updated when the controller recalibrates.
struct PatternChange {
  double time = 0.0;
  std::string job_id;
  double duty_cycle = 0.0;  // 0 keeps the current value
  double period = 0.0;      // 0 keeps the current value
};

enum class SimScheduler { kMetronome, kAgnostic, kExclusive, kLatencyOnly, kIdeal };

std::string_view ToString(SimScheduler s);
SimScheduler ParseSimScheduler(std::string_view s);

struct SimulationConfig {
  SimScheduler scheduler = SimScheduler::kMetronome;
  SchedulerParams scheduling;
  MonitorParams monitor;
  double sigma = 0.01;   // lognormal drift on compute time
  double tick = 1e-3;    // alignment tolerance, seconds
  double bucket = 1.0;   // utilization series granularity, seconds
  bool monitoring = true;   // continuous regulation
  bool stage_three = true;  // false: compact rotations instead of max Ψ
  RecalcSearch recalc = RecalcSearch::kExhaustive;
  bool retry_rejected = true;  // queue rejected jobs until resources free
  double max_time = 1e6;
  std::vector<BackgroundFlow> background;
  std::vector<PatternChange> pattern_changes;
};

struct JobReport {
  std::string id;
  std::string workload_id;
  Priority priority = Priority::kLow;
  bool accepted = false;           // ever admitted
  bool accepted_on_arrival = false;
  double arrival = 0.0;
  double admit_time = 0.0;
  double completion_time = 0.0;
  std::vector<double> iteration_start;  // communication start of each iteration
  std::vector<double> iterations;       // durations, seconds
  double mean_iteration = 0.0;
  double per_1000 = 0.0;  // average time per 1,000 iterations
  int pauses = 0;
  std::vector<std::size_t> nodes;  // node of each task
};

struct LinkReport {
  std::size_t node = 0;
  std::string node_id;
  double utilization = 0.0;  // time-averaged, job traffic only
  std::vector<double> series;  // per bucket
};

struct Readjustment {
  double time = 0.0;
  std::string job_id;
  std::string action;  // pause, align, recalibrate
  double amount = 0.0;
  double next_start = 0.0;
  // Alignment reference: the parent job's latest communication start and the
  // two shifts on the shared link at decision time.
  std::string parent;
  double parent_start = 0.0;
  double parent_shift = 0.0;
  double shift = 0.0;
  double period = 0.0;
};

struct AdmissionRecord {
  double time = 0.0;
  std::string job_id;
  bool accepted = false;
  std::string reason;
};

struct SimulationReport {
  std::string scheduler;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double tick = 0.0;
  double bucket = 0.0;
  std::vector<JobReport> jobs;
  std::vector<LinkReport> links;
  double gamma = 0.0;
  double tct = 0.0;
  int pause_count = 0;
  std::vector<Readjustment> readjustments;
  std::vector<AdmissionRecord> admissions;

  const JobReport *FindJob(const std::string &id) const;
};

/// Runs the trace to completion. Deterministic for a given seed.
SimulationReport Simulate(const Trace &trace, const ClusterSpec &cluster,
                          const SimulationConfig &config);

struct ComparisonRow {
  std::string scheduler;
  double tct = 0.0;
  double gamma = 0.0;
  double mean_high = 0.0;
  double mean_low = 0.0;
  int accepted = 0;
  int accepted_on_arrival = 0;
  int pauses = 0;
  double tct_delta = 0.0;  // relative to the first scheduler in the list
};

struct Comparison {
  std::vector<SimulationReport> reports;
  std::vector<ComparisonRow> rows;
};

/// One run per scheduler on the identical trace and seed.
Comparison CompareSchedulers(const Trace &trace, const ClusterSpec &cluster,
                             const SimulationConfig &config,
                             const std::vector<SimScheduler> &schedulers);

/// Mean iteration time over jobs of a priority class (iteration-weighted).
double MeanIteration(const SimulationReport &report, Priority priority);

}  // namespace metronome
