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

// Per-pod placement pipeline: PreFilter, Filter, Score, NormalizeScore and
// Reserve, with all-or-nothing admission of whole jobs.

#pragma once

#include "metronome/geometry.hpp"
#include "metronome/link_search.hpp"
#include "metronome/metrics.hpp"
#include "metronome/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metronome {

struct SchedulerParams {
  PeriodParams period;
  int di_pre = 72;
  // Score enumeration beyond this many combinations holds deployed jobs at
  // their current rotation.
  std::uint64_t max_enumeration = std::uint64_t{1} << 22;
};

/// Node selection policy. Only kMetronome runs the bandwidth-aware pipeline.
enum class Policy {
  kMetronome,
  kAgnostic,     // resource fit, least-allocated GPU spreading
  kExclusive,    // resource fit and Σ declared rates within the link
  kLatencyOnly,  // resource fit, bandwidth cap, latency normalization
};

std::string_view ToString(Policy p);
Policy ParsePolicy(std::string_view s);

struct LatencyScoreCache {
  std::string pod_id;
  std::vector<double> delta;  // per node
};

/// Δ_n over the pod's deployed dependents (same job plus explicit partners),
/// or the average latency row when there are none.
LatencyScoreCache PreFilter(const TaskSpec &pod, const Placement &placement,
                            const ClusterSpec &cluster,
                            const std::vector<std::string> &dependent_jobs);

/// (job, node) incidences of links that need time division: at least two
/// jobs with bandwidth tasks whose declared rates exceed the link capacity.
std::vector<std::pair<std::string, std::size_t>> ContentionEdges(
    const Placement &placement, const ClusterSpec &cluster);

/// True when the job/link contention graph contains a cycle.
bool ContentionGraphHasCycle(const Placement &placement, const ClusterSpec &cluster);

/// True iff placing the pod on the node closes a cycle in the graph.
bool HasDependencyCycle(const Placement &placement, const ClusterSpec &cluster,
                        const TaskSpec &pod, std::size_t node);

/// Feasible nodes in index order. Throws kNoFeasibleNode when none remain.
std::vector<std::size_t> Filter(const TaskSpec &pod, const Placement &placement,
                                const ClusterSpec &cluster);

struct ScoreResult {
  double score = 0.0;
  bool early_return = false;
  bool truncated = false;
  std::optional<RotationScheme> scheme;  // empty on early return
  double psi = 0.0;
};

/// `current` is the link's scheme in force, used when the enumeration cap
/// holds deployed jobs in place.
ScoreResult Score(const TaskSpec &pod, std::size_t node, const Placement &placement,
                  const ClusterSpec &cluster, const SchedulerParams &params,
                  const RotationScheme *current = nullptr);

/// Picks the node with the highest score; ties go through the normalized
/// latency cache and then the smallest node index.
std::size_t NormalizeAndSelect(const std::vector<std::pair<std::size_t, double>> &scores,
                               const LatencyScoreCache &cache, const TaskSpec &pod);

/// Latency normalization of the cached Δ values, 100 for the closest node.
std::vector<double> NormalizeLatency(const std::vector<double> &delta);

struct SchedulingOutcome {
  std::string task_id;
  std::size_t node = 0;
  double score = 0.0;
  bool early_return = false;
  bool skip_phase_three = true;
  std::optional<RotationScheme> scheme;
  std::map<std::string, double> shifts;
  std::vector<std::string> sharing_set;
};

/// Commits the pod and assembles the controller message.
SchedulingOutcome Reserve(const TaskSpec &pod, std::size_t node,
                          const ScoreResult &score, Placement &placement,
                          std::map<std::size_t, RotationScheme> &schemes);

struct JobSchedule {
  std::string job_id;
  bool accepted = false;
  std::vector<SchedulingOutcome> outcomes;
  std::string failed_task;  // set on rejection
  std::string reason;
};

class Scheduler {
 public:
  Scheduler(ClusterSpec cluster, SchedulerParams params, Policy policy = Policy::kMetronome);

  /// Makes a workload's structure and dependencies known.
  void Register(const WorkloadSpec &workload);

  /// Gang admission of one job of a registered workload. On rejection the
  /// placement and schemes are left exactly as before.
  JobSchedule ScheduleJob(const std::string &workload_id, const std::string &job_id);
  /// Registers the workload and schedules its jobs in order.
  std::vector<JobSchedule> ScheduleWorkload(const WorkloadSpec &workload);

  /// Frees a finished job and drops it from every link scheme.
  void RemoveJob(const std::string &job_id);

  /// Replaces the declared pattern of a placed task (CR update analog).
  void UpdateTask(const TaskSpec &task);

  /// Installs a recalculated scheme for a link.
  void SetScheme(std::size_t node, RotationScheme scheme);

  const ClusterSpec &cluster() const { return cluster_; }
  const Placement &placement() const { return placement_; }
  const std::map<std::size_t, RotationScheme> &schemes() const { return schemes_; }
  const SchedulerParams &params() const { return params_; }
  Policy policy() const { return policy_; }
  const std::vector<WorkloadSpec> &workloads() const { return workloads_; }
  const WorkloadSpec *FindWorkload(const std::string &id) const;

 private:
  SchedulingOutcome SchedulePod(const TaskSpec &pod, const WorkloadSpec &workload);
  std::size_t SelectBaseline(const TaskSpec &pod, const WorkloadSpec &workload) const;

  ClusterSpec cluster_;
  SchedulerParams params_;
  Policy policy_;
  Placement placement_;
  std::map<std::size_t, RotationScheme> schemes_;
  std::vector<WorkloadSpec> workloads_;
};

}  // namespace metronome
