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

#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metronome {

enum class ErrorKind {
  kInsufficientResources,
  kEmptySet,
  kIncompatible,
  kUnplacedTask,
  kNoFeasibleNode,
  kInstanceTooLarge,
  kConfig,
  kInfeasibleLoad,
  kCycleDetected,
  kInvalidArgument,
};

std::string_view ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Only two levels exist; priority is set per job and inherited by tasks.
enum class Priority : std::uint8_t { kLow = 0, kHigh = 1 };

std::string_view ToString(Priority p);
Priority ParsePriority(std::string_view s);

struct Resources {
  double cpu = 0.0;
  double mem = 0.0;  // bytes
  double gpu = 0.0;

  Resources &operator+=(const Resources &o) {
    cpu += o.cpu;
    mem += o.mem;
    gpu += o.gpu;
    return *this;
  }
  Resources &operator-=(const Resources &o) {
    cpu -= o.cpu;
    mem -= o.mem;
    gpu -= o.gpu;
    return *this;
  }
  /// True when every component of `need` fits into this.
  bool Covers(const Resources &need) const {
    return cpu >= need.cpu && mem >= need.mem && gpu >= need.gpu;
  }
  bool operator==(const Resources &) const = default;
};

struct NodeSpec {
  std::string id;
  Resources capacity;
  double link_bandwidth = 0.0;  // host link capacity, bits/s
};

struct ClusterSpec {
  std::vector<NodeSpec> nodes;
  // τ: symmetric, diagonal 1. Unitless weights.
  Eigen::MatrixXd latency;
  double b_max = 0.0;

  std::size_t size() const { return nodes.size(); }
  std::size_t IndexOf(std::string_view node_id) const;

  /// Fills b_max from the nodes and checks every invariant.
  void Finalize();
  void Validate() const;
};

struct TaskSpec {
  std::string id;
  std::string job_id;
  std::string workload_id;
  double period = 0.0;      // seconds
  double duty_cycle = 0.0;  // [0, 1]
  double bandwidth = 0.0;   // bits/s
  Resources request;
  Priority priority = Priority::kLow;
  bool low_comm = false;
  std::int64_t submit_order = 0;

  double comm_duration() const { return period * duty_cycle; }
  /// Bandwidth-declaring tasks take part in link sharing.
  bool declares_bandwidth() const { return !low_comm && bandwidth > 0.0; }
  void Validate() const;
  bool operator==(const TaskSpec &) const = default;
};

struct JobSpec {
  std::string id;
  std::string workload_id;
  Priority priority = Priority::kLow;
  std::vector<TaskSpec> tasks;
  // Run length for simulation: iterations for communicating jobs, seconds
  // for LowComm jobs.
  std::int64_t iterations = 0;
  double duration = 0.0;

  bool low_comm() const;
  void Validate() const;
};

struct WorkloadSpec {
  std::string id;
  std::vector<JobSpec> jobs;
  // ν_w, ordered job-id pairs.
  std::vector<std::pair<std::string, std::string>> dependencies;
  double arrival = 0.0;

  const JobSpec *FindJob(std::string_view job_id) const;
  void Validate() const;
};

/// (priority, submit_order) key. Greater means more important.
struct PriorityKey {
  Priority priority = Priority::kLow;
  std::int64_t submit_order = 0;

  friend bool operator==(const PriorityKey &, const PriorityKey &) = default;
  friend std::strong_ordering operator<=>(const PriorityKey &a,
                                          const PriorityKey &b) {
    if (a.priority != b.priority) return a.priority <=> b.priority;
    // Earlier submission wins.
    return b.submit_order <=> a.submit_order;
  }
};

inline PriorityKey KeyOf(const TaskSpec &t) {
  return {t.priority, t.submit_order};
}

/// The task with the highest (priority, earliest submit_order). Throws
/// kEmptySet on an empty input.
const TaskSpec &HighestPriorityTask(std::span<const TaskSpec> tasks);

/// Cluster bookkeeping: where tasks are, what is left on each node, and the
/// all-or-nothing deployment flags.
class Placement {
 public:
  Placement() = default;
  explicit Placement(const ClusterSpec &cluster);

  /// Makes the job/workload structure known so D_{w,j} and D_w can be derived.
  void RegisterWorkload(const WorkloadSpec &workload);

  /// Throws kInsufficientResources (placement unchanged) if any residual
  /// would go negative, kInvalidArgument for unknown nodes or double placement.
  void Place(const TaskSpec &task, std::size_t node);
  /// Frees the task's resources. No-op for unknown tasks.
  void Remove(std::string_view task_id);

  std::size_t node_count() const { return residual_.size(); }
  std::optional<std::size_t> NodeOf(std::string_view task_id) const;
  const TaskSpec *FindTask(std::string_view task_id) const;
  const Resources &residual(std::size_t node) const { return residual_.at(node); }
  const Resources &capacity(std::size_t node) const { return capacity_.at(node); }

  /// All tasks on the node in submit order.
  std::vector<TaskSpec> TasksOn(std::size_t node) const;
  /// Bandwidth-declaring tasks on the node (the host link's sharing set).
  std::vector<TaskSpec> SharingSet(std::size_t node) const;
  /// Replaces the stored spec of an already-placed task (pattern updates).
  void UpdateTask(const TaskSpec &task);

  bool JobDeployed(std::string_view job_id) const;
  bool WorkloadDeployed(std::string_view workload_id) const;
  std::size_t placed_count() const { return node_of_.size(); }

  /// P_{w,j}(n) as a dense vector over nodes.
  Eigen::VectorXd TaskCounts(std::string_view job_id) const;

  /// Every placed task id, sorted.
  std::vector<std::string> PlacedTaskIds() const;

  bool operator==(const Placement &) const = default;

 private:
  std::vector<Resources> capacity_;
  std::vector<Resources> residual_;
  std::map<std::string, std::size_t, std::less<>> node_of_;
  std::map<std::string, TaskSpec, std::less<>> tasks_;
  std::vector<std::set<std::string, std::less<>>> on_node_;
  // job id -> declared task ids; workload id -> job ids
  std::map<std::string, std::vector<std::string>, std::less<>> job_tasks_;
  std::map<std::string, std::vector<std::string>, std::less<>> workload_jobs_;
};

/// Value-returning form of Placement::Place.
Placement ApplyPlacement(Placement placement, const TaskSpec &task,
                         std::size_t node);

/// Assigns monotone submit_order to every task in workload/job/task order and
/// propagates job priority and ids into the tasks.
void AssignSubmitOrder(std::vector<WorkloadSpec> &workloads,
                       std::int64_t first = 0);

/// All tasks of a job and explicit dependency partners (both directions of
/// each ν_w pair). The job's own id is included.
std::vector<std::string> DependentJobs(const WorkloadSpec &workload,
                                       std::string_view job_id);

}  // namespace metronome
