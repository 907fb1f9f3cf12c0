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

#include "metronome/model.hpp"

#include <algorithm>
#include <cmath>

namespace metronome {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInsufficientResources: return "InsufficientResources";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kIncompatible: return "Incompatible";
    case ErrorKind::kUnplacedTask: return "UnplacedTask";
    case ErrorKind::kNoFeasibleNode: return "NoFeasibleNode";
    case ErrorKind::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kInfeasibleLoad: return "InfeasibleLoad";
    case ErrorKind::kCycleDetected: return "CycleDetected";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view ToString(Priority p) {
  return p == Priority::kHigh ? "high" : "low";
}

Priority ParsePriority(std::string_view s) {
  if (s == "high" || s == "High" || s == "HIGH") return Priority::kHigh;
  if (s == "low" || s == "Low" || s == "LOW") return Priority::kLow;
  throw Error(ErrorKind::kConfig, "unknown priority '" + std::string(s) + "'");
}

std::size_t ClusterSpec::IndexOf(std::string_view node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == node_id) return i;
  }
  throw Error(ErrorKind::kConfig, "unknown node '" + std::string(node_id) + "'");
}

void ClusterSpec::Finalize() {
  b_max = 0.0;
  for (const auto &n : nodes) b_max = std::max(b_max, n.link_bandwidth);
  Validate();
}

void ClusterSpec::Validate() const {
  if (nodes.empty()) throw Error(ErrorKind::kConfig, "cluster has no nodes");
  std::set<std::string, std::less<>> seen;
  double max_bw = 0.0;
  for (const auto &n : nodes) {
    if (!seen.insert(n.id).second) {
      throw Error(ErrorKind::kConfig, "duplicate node id '" + n.id + "'");
    }
    if (!(n.capacity.cpu > 0 && n.capacity.mem > 0 && n.capacity.gpu > 0 &&
          n.link_bandwidth > 0)) {
      throw Error(ErrorKind::kConfig,
                  "node '" + n.id + "' must have positive capacities");
    }
    max_bw = std::max(max_bw, n.link_bandwidth);
  }
  const auto n = static_cast<Eigen::Index>(nodes.size());
  if (latency.rows() != n || latency.cols() != n) {
    throw Error(ErrorKind::kConfig, "latency matrix must be " +
                                        std::to_string(n) + "x" +
                                        std::to_string(n));
  }
  for (Eigen::Index x = 0; x < n; ++x) {
    if (latency(x, x) != 1.0) {
      throw Error(ErrorKind::kConfig, "latency diagonal must be 1");
    }
    for (Eigen::Index y = 0; y < n; ++y) {
      if (!(latency(x, y) > 0.0)) {
        throw Error(ErrorKind::kConfig, "latency entries must be positive");
      }
      if (latency(x, y) != latency(y, x)) {
        throw Error(ErrorKind::kConfig, "latency matrix must be symmetric");
      }
    }
  }
  if (b_max != max_bw) {
    throw Error(ErrorKind::kConfig, "b_max must equal the largest link bandwidth");
  }
}

void TaskSpec::Validate() const {
  if (id.empty()) throw Error(ErrorKind::kConfig, "task without id");
  if (request.cpu < 0 || request.mem < 0 || request.gpu < 0) {
    throw Error(ErrorKind::kConfig, "task '" + id + "' has negative requests");
  }
  if (low_comm) return;
  if (!(period > 0.0)) {
    throw Error(ErrorKind::kConfig, "task '" + id + "' needs period > 0");
  }
  if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) {
    throw Error(ErrorKind::kConfig, "task '" + id + "' duty_cycle outside [0,1]");
  }
  if (!(bandwidth > 0.0)) {
    throw Error(ErrorKind::kConfig, "task '" + id + "' needs bandwidth > 0");
  }
}

bool JobSpec::low_comm() const {
  return std::all_of(tasks.begin(), tasks.end(),
                     [](const TaskSpec &t) { return t.low_comm; });
}

void JobSpec::Validate() const {
  if (tasks.empty()) throw Error(ErrorKind::kConfig, "job '" + id + "' has no tasks");
  for (const auto &t : tasks) {
    t.Validate();
    if (t.priority != priority) {
      throw Error(ErrorKind::kConfig,
                  "task '" + t.id + "' priority differs from its job");
    }
  }
}

const JobSpec *WorkloadSpec::FindJob(std::string_view job_id) const {
  for (const auto &j : jobs) {
    if (j.id == job_id) return &j;
  }
  return nullptr;
}

void WorkloadSpec::Validate() const {
  if (jobs.empty()) throw Error(ErrorKind::kConfig, "workload '" + id + "' has no jobs");
  for (const auto &j : jobs) j.Validate();
  for (const auto &[a, b] : dependencies) {
    if (!FindJob(a) || !FindJob(b)) {
      throw Error(ErrorKind::kConfig, "dependency (" + a + ", " + b +
                                          ") references a job outside '" +
                                          id + "'");
    }
  }
}

const TaskSpec &HighestPriorityTask(std::span<const TaskSpec> tasks) {
  if (tasks.empty()) throw Error(ErrorKind::kEmptySet, "no tasks on link");
  const TaskSpec *best = &tasks.front();
  for (const auto &t : tasks) {
    if (KeyOf(t) > KeyOf(*best)) best = &t;
  }
  return *best;
}

Placement::Placement(const ClusterSpec &cluster) {
  for (const auto &n : cluster.nodes) {
    capacity_.push_back(n.capacity);
    residual_.push_back(n.capacity);
  }
  on_node_.resize(cluster.nodes.size());
}

void Placement::RegisterWorkload(const WorkloadSpec &workload) {
  auto &jobs = workload_jobs_[workload.id];
  jobs.clear();
  for (const auto &j : workload.jobs) {
    jobs.push_back(j.id);
    auto &ids = job_tasks_[j.id];
    ids.clear();
    for (const auto &t : j.tasks) ids.push_back(t.id);
  }
}

void Placement::Place(const TaskSpec &task, std::size_t node) {
  if (node >= residual_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "node index out of range");
  }
  if (node_of_.contains(task.id)) {
    throw Error(ErrorKind::kInvalidArgument, "task '" + task.id + "' already placed");
  }
  if (!residual_[node].Covers(task.request)) {
    throw Error(ErrorKind::kInsufficientResources,
                "task '" + task.id + "' does not fit node " + std::to_string(node));
  }
  residual_[node] -= task.request;
  node_of_.emplace(task.id, node);
  tasks_.emplace(task.id, task);
  on_node_[node].insert(task.id);
  // Jobs never registered are treated as consisting of what was placed.
  auto it = job_tasks_.find(task.job_id);
  if (it == job_tasks_.end()) {
    job_tasks_[task.job_id].push_back(task.id);
  } else if (std::find(it->second.begin(), it->second.end(), task.id) ==
             it->second.end()) {
    it->second.push_back(task.id);
  }
}

void Placement::Remove(std::string_view task_id) {
  auto it = node_of_.find(task_id);
  if (it == node_of_.end()) return;
  const std::size_t node = it->second;
  auto t = tasks_.find(task_id);
  residual_[node] += t->second.request;
  on_node_[node].erase(on_node_[node].find(task_id));
  tasks_.erase(t);
  node_of_.erase(it);
}

std::optional<std::size_t> Placement::NodeOf(std::string_view task_id) const {
  auto it = node_of_.find(task_id);
  if (it == node_of_.end()) return std::nullopt;
  return it->second;
}

const TaskSpec *Placement::FindTask(std::string_view task_id) const {
  auto it = tasks_.find(task_id);
  return it == tasks_.end() ? nullptr : &it->second;
}

std::vector<TaskSpec> Placement::TasksOn(std::size_t node) const {
  std::vector<TaskSpec> out;
  for (const auto &id : on_node_.at(node)) out.push_back(tasks_.find(id)->second);
  std::sort(out.begin(), out.end(), [](const TaskSpec &a, const TaskSpec &b) {
    return a.submit_order != b.submit_order ? a.submit_order < b.submit_order
                                            : a.id < b.id;
  });
  return out;
}

std::vector<TaskSpec> Placement::SharingSet(std::size_t node) const {
  auto all = TasksOn(node);
  std::erase_if(all, [](const TaskSpec &t) { return !t.declares_bandwidth(); });
  return all;
}

void Placement::UpdateTask(const TaskSpec &task) {
  auto it = tasks_.find(task.id);
  if (it == tasks_.end()) {
    throw Error(ErrorKind::kUnplacedTask, "task '" + task.id + "' is not placed");
  }
  if (!(it->second.request == task.request)) {
    throw Error(ErrorKind::kInvalidArgument, "resource requests cannot change in place");
  }
  it->second = task;
}

bool Placement::JobDeployed(std::string_view job_id) const {
  auto it = job_tasks_.find(job_id);
  if (it == job_tasks_.end() || it->second.empty()) return false;
  // D_{w,j} = 1 only when the placed fraction reaches 1.
  return std::all_of(it->second.begin(), it->second.end(),
                     [&](const std::string &t) { return node_of_.contains(t); });
}

bool Placement::WorkloadDeployed(std::string_view workload_id) const {
  auto it = workload_jobs_.find(workload_id);
  if (it == workload_jobs_.end() || it->second.empty()) return false;
  return std::all_of(it->second.begin(), it->second.end(),
                     [&](const std::string &j) { return JobDeployed(j); });
}

Eigen::VectorXd Placement::TaskCounts(std::string_view job_id) const {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(residual_.size()));
  for (const auto &[id, task] : tasks_) {
    if (task.job_id == job_id) counts(static_cast<Eigen::Index>(node_of_.at(id))) += 1.0;
  }
  return counts;
}

std::vector<std::string> Placement::PlacedTaskIds() const {
  std::vector<std::string> ids;
  ids.reserve(node_of_.size());
  for (const auto &[id, node] : node_of_) ids.push_back(id);
  return ids;
}

Placement ApplyPlacement(Placement placement, const TaskSpec &task,
                         std::size_t node) {
  placement.Place(task, node);
  return placement;
}

void AssignSubmitOrder(std::vector<WorkloadSpec> &workloads, std::int64_t first) {
  std::int64_t order = first;
  for (auto &w : workloads) {
    for (auto &j : w.jobs) {
      j.workload_id = w.id;
      for (auto &t : j.tasks) {
        t.job_id = j.id;
        t.workload_id = w.id;
        t.priority = j.priority;
        t.submit_order = order++;
      }
    }
  }
}

std::vector<std::string> DependentJobs(const WorkloadSpec &workload,
                                       std::string_view job_id) {
  std::vector<std::string> out{std::string(job_id)};
  for (const auto &[a, b] : workload.dependencies) {
    if (a == job_id && b != job_id) out.push_back(b);
    if (b == job_id && a != job_id) out.push_back(a);
  }
  std::sort(out.begin() + 1, out.end());
  out.erase(std::unique(out.begin() + 1, out.end()), out.end());
  return out;
}

}  // namespace metronome
