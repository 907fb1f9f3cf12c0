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

#include "metronome/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace metronome {

namespace {

constexpr double kScoreTol = 1e-9;

// Union-find over "job" and "link" vertices.
class Forest {
 public:
  std::size_t Vertex(const std::string &key) {
    auto [it, fresh] = ids_.emplace(key, parent_.size());
    if (fresh) parent_.push_back(parent_.size());
    return it->second;
  }
  std::size_t Find(std::size_t v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  // False when a and b were already connected.
  bool Join(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::map<std::string, std::size_t> ids_;
  std::vector<std::size_t> parent_;
};

bool HasCycle(const std::vector<std::pair<std::string, std::size_t>> &edges) {
  Forest f;
  for (const auto &[job, node] : edges) {
    if (!f.Join(f.Vertex("j:" + job), f.Vertex("l:" + std::to_string(node)))) return true;
  }
  return false;
}

double DeclaredLoad(const std::vector<TaskSpec> &sharing) {
  double sum = 0.0;
  for (const auto &t : sharing) sum += t.bandwidth;
  return sum;
}

bool FitsResources(const TaskSpec &pod, const Placement &placement, std::size_t n) {
  return placement.residual(n).Covers(pod.request);
}

bool FitsLink(const TaskSpec &pod, const ClusterSpec &cluster, std::size_t n) {
  return !pod.declares_bandwidth() || pod.bandwidth <= cluster.nodes[n].link_bandwidth;
}

// Fraction of GPUs (then CPU) left after placing the pod.
double LeastAllocated(const TaskSpec &pod, const Placement &placement, std::size_t n) {
  const Resources &cap = placement.capacity(n);
  const Resources &res = placement.residual(n);
  const double gpu = (res.gpu - pod.request.gpu) / cap.gpu;
  const double cpu = (res.cpu - pod.request.cpu) / cap.cpu;
  return gpu + 1e-3 * cpu;
}

}  // namespace

std::string_view ToString(Policy p) {
  switch (p) {
    case Policy::kMetronome: return "metronome";
    case Policy::kAgnostic: return "agnostic";
    case Policy::kExclusive: return "exclusive";
    case Policy::kLatencyOnly: return "latency-only";
  }
  return "unknown";
}

Policy ParsePolicy(std::string_view s) {
  if (s == "metronome") return Policy::kMetronome;
  if (s == "agnostic") return Policy::kAgnostic;
  if (s == "exclusive") return Policy::kExclusive;
  if (s == "latency-only") return Policy::kLatencyOnly;
  throw Error(ErrorKind::kInvalidArgument, "unknown scheduler '" + std::string(s) + "'");
}

LatencyScoreCache PreFilter(const TaskSpec &pod, const Placement &placement,
                            const ClusterSpec &cluster,
                            const std::vector<std::string> &dependent_jobs) {
  LatencyScoreCache cache;
  cache.pod_id = pod.id;
  const std::size_t n = cluster.size();
  cache.delta.assign(n, 0.0);
  std::vector<std::size_t> dependents;
  if (!pod.low_comm) {
    for (const auto &id : placement.PlacedTaskIds()) {
      if (id == pod.id) continue;
      const TaskSpec *q = placement.FindTask(id);
      if (std::find(dependent_jobs.begin(), dependent_jobs.end(), q->job_id) !=
          dependent_jobs.end()) {
        dependents.push_back(*placement.NodeOf(id));
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    for (std::size_t y : dependents) cache.delta[x] += cluster.latency(xi, static_cast<Eigen::Index>(y));
    if (cache.delta[x] == 0.0) cache.delta[x] = cluster.latency.row(xi).mean();
  }
  return cache;
}

std::vector<std::pair<std::string, std::size_t>> ContentionEdges(
    const Placement &placement, const ClusterSpec &cluster) {
  std::vector<std::pair<std::string, std::size_t>> edges;
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    const auto sharing = placement.SharingSet(n);
    std::set<std::string> jobs;
    for (const auto &t : sharing) jobs.insert(t.job_id);
    if (jobs.size() < 2 || DeclaredLoad(sharing) <= cluster.nodes[n].link_bandwidth) continue;
    for (const auto &j : jobs) edges.emplace_back(j, n);
  }
  return edges;
}

bool ContentionGraphHasCycle(const Placement &placement, const ClusterSpec &cluster) {
  return HasCycle(ContentionEdges(placement, cluster));
}

bool HasDependencyCycle(const Placement &placement, const ClusterSpec &cluster,
                        const TaskSpec &pod, std::size_t node) {
  if (!pod.declares_bandwidth() || placement.NodeOf(pod.id)) return false;
  // Hypothesis only: resources are not checked here.
  auto edges = ContentionEdges(placement, cluster);
  if (HasCycle(edges)) return false;
  std::set<std::string> jobs{pod.job_id};
  auto sharing = placement.SharingSet(node);
  for (const auto &t : sharing) jobs.insert(t.job_id);
  if (jobs.size() < 2 ||
      DeclaredLoad(sharing) + pod.bandwidth <= cluster.nodes[node].link_bandwidth) {
    return false;
  }
  std::erase_if(edges, [&](const auto &e) { return e.second == node; });
  for (const auto &j : jobs) edges.emplace_back(j, node);
  return HasCycle(edges);
}

std::vector<std::size_t> Filter(const TaskSpec &pod, const Placement &placement,
                                const ClusterSpec &cluster) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    if (HasDependencyCycle(placement, cluster, pod, n)) continue;
    if (!FitsResources(pod, placement, n)) continue;
    if (!FitsLink(pod, cluster, n)) continue;
    out.push_back(n);
  }
  if (out.empty()) {
    throw Error(ErrorKind::kNoFeasibleNode, "no feasible node for task '" + pod.id + "'");
  }
  return out;
}

ScoreResult Score(const TaskSpec &pod, std::size_t node, const Placement &placement,
                  const ClusterSpec &cluster, const SchedulerParams &params,
                  const RotationScheme *current) {
  ScoreResult r;
  const double capacity = cluster.nodes[node].link_bandwidth;
  auto sharing = placement.SharingSet(node);
  if (!pod.declares_bandwidth() || placement.TasksOn(node).empty() ||
      DeclaredLoad(sharing) + pod.bandwidth <= capacity) {
    r.score = 100.0;
    r.early_return = true;
    r.psi = std::numbers::pi;
    return r;
  }
  sharing.push_back(pod);
  const LinkSearch search(sharing, capacity, params.di_pre, params.period, pod.job_id);
  const std::vector<int> now =
      current ? search.FromScheme(*current) : std::vector<int>(search.groups().size(), 0);
  const SearchResult found = FirstRunMiddle(search, now, params.max_enumeration);
  r.score = found.score;
  r.psi = found.psi;
  r.truncated = found.truncated;
  r.scheme = search.ToScheme(node, found.index);
  return r;
}

std::vector<double> NormalizeLatency(const std::vector<double> &delta) {
  std::vector<double> out(delta.size(), 100.0);
  if (delta.empty()) return out;
  const auto [lo, hi] = std::minmax_element(delta.begin(), delta.end());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (*hi != *lo) {
      out[i] = 100.0 - std::floor(100.0 * (delta[i] - *lo) / (*hi - *lo));
    } else {
      out[i] = 100.0 - (delta[i] - *lo);
    }
  }
  return out;
}

std::size_t NormalizeAndSelect(const std::vector<std::pair<std::size_t, double>> &scores,
                               const LatencyScoreCache &cache, const TaskSpec &pod) {
  if (scores.empty()) throw Error(ErrorKind::kNoFeasibleNode, "no scored node");
  double best = scores.front().second;
  for (const auto &[n, s] : scores) best = std::max(best, s);
  std::vector<std::size_t> top;
  for (const auto &[n, s] : scores) {
    if (s >= best - kScoreTol) top.push_back(n);
  }
  std::sort(top.begin(), top.end());
  if (top.size() == 1) return top.front();
  const std::vector<double> norm = NormalizeLatency(cache.delta);
  std::size_t chosen = top.front();
  double chosen_value = -1.0;
  for (std::size_t n : top) {
    const double v = pod.low_comm ? 100.0 - norm[n] : norm[n];
    if (v > chosen_value) {
      chosen = n;
      chosen_value = v;
    }
  }
  return chosen;
}

SchedulingOutcome Reserve(const TaskSpec &pod, std::size_t node,
                          const ScoreResult &score, Placement &placement,
                          std::map<std::size_t, RotationScheme> &schemes) {
  placement.Place(pod, node);
  SchedulingOutcome out;
  out.task_id = pod.id;
  out.node = node;
  out.score = score.score;
  out.early_return = score.early_return;
  for (const auto &t : placement.SharingSet(node)) out.sharing_set.push_back(t.id);
  out.skip_phase_three = score.early_return || score.score < 100.0 - kScoreTol ||
                         out.sharing_set.size() == 2;
  if (score.scheme) {
    out.scheme = score.scheme;
    out.shifts = score.scheme->time_shifts;
    schemes[node] = *score.scheme;
  }
  return out;
}

Scheduler::Scheduler(ClusterSpec cluster, SchedulerParams params, Policy policy)
    : cluster_(std::move(cluster)), params_(params), policy_(policy), placement_(cluster_) {}

void Scheduler::Register(const WorkloadSpec &workload) {
  auto it = std::find_if(workloads_.begin(), workloads_.end(),
                         [&](const WorkloadSpec &w) { return w.id == workload.id; });
  if (it == workloads_.end()) {
    workloads_.push_back(workload);
  } else {
    *it = workload;
  }
  placement_.RegisterWorkload(workload);
}

const WorkloadSpec *Scheduler::FindWorkload(const std::string &id) const {
  for (const auto &w : workloads_) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

std::size_t Scheduler::SelectBaseline(const TaskSpec &pod, const WorkloadSpec &workload) const {
  std::vector<std::size_t> feasible;
  for (std::size_t n = 0; n < cluster_.size(); ++n) {
    if (!FitsResources(pod, placement_, n)) continue;
    if (policy_ == Policy::kLatencyOnly && !FitsLink(pod, cluster_, n)) continue;
    if (policy_ == Policy::kExclusive && pod.declares_bandwidth() &&
        DeclaredLoad(placement_.SharingSet(n)) + pod.bandwidth >
            cluster_.nodes[n].link_bandwidth * (1.0 + 1e-12)) {
      continue;
    }
    feasible.push_back(n);
  }
  if (feasible.empty()) {
    throw Error(ErrorKind::kNoFeasibleNode, "no feasible node for task '" + pod.id + "'");
  }
  if (policy_ == Policy::kLatencyOnly) {
    const auto cache =
        PreFilter(pod, placement_, cluster_, DependentJobs(workload, pod.job_id));
    std::vector<std::pair<std::size_t, double>> flat;
    for (std::size_t n : feasible) flat.emplace_back(n, 100.0);
    return NormalizeAndSelect(flat, cache, pod);
  }
  std::size_t best = feasible.front();
  for (std::size_t n : feasible) {
    if (LeastAllocated(pod, placement_, n) > LeastAllocated(pod, placement_, best) + 1e-12) {
      best = n;
    }
  }
  return best;
}

SchedulingOutcome Scheduler::SchedulePod(const TaskSpec &pod, const WorkloadSpec &workload) {
  if (policy_ != Policy::kMetronome) {
    ScoreResult flat;
    flat.score = 100.0;
    flat.early_return = true;
    return Reserve(pod, SelectBaseline(pod, workload), flat, placement_, schemes_);
  }
  const auto cache = PreFilter(pod, placement_, cluster_, DependentJobs(workload, pod.job_id));
  const auto nodes = Filter(pod, placement_, cluster_);
  std::vector<std::pair<std::size_t, double>> scores;
  std::map<std::size_t, ScoreResult> results;
  for (std::size_t n : nodes) {
    auto it = schemes_.find(n);
    ScoreResult r = Score(pod, n, placement_, cluster_, params_,
                          it == schemes_.end() ? nullptr : &it->second);
    scores.emplace_back(n, r.score);
    results.emplace(n, std::move(r));
  }
  const std::size_t chosen = NormalizeAndSelect(scores, cache, pod);
  return Reserve(pod, chosen, results.at(chosen), placement_, schemes_);
}

JobSchedule Scheduler::ScheduleJob(const std::string &workload_id, const std::string &job_id) {
  const WorkloadSpec *w = FindWorkload(workload_id);
  if (!w) throw Error(ErrorKind::kInvalidArgument, "unknown workload '" + workload_id + "'");
  const JobSpec *job = w->FindJob(job_id);
  if (!job) throw Error(ErrorKind::kInvalidArgument, "unknown job '" + job_id + "'");
  JobSchedule result;
  result.job_id = job_id;
  // Gang admission: snapshot, try every task, roll back on the first failure.
  const Placement saved_placement = placement_;
  const auto saved_schemes = schemes_;
  for (const auto &task : job->tasks) {
    try {
      result.outcomes.push_back(SchedulePod(task, *w));
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::kNoFeasibleNode) throw;
      placement_ = saved_placement;
      schemes_ = saved_schemes;
      result.outcomes.clear();
      result.failed_task = task.id;
      result.reason = e.what();
      return result;
    }
  }
  result.accepted = true;
  return result;
}

std::vector<JobSchedule> Scheduler::ScheduleWorkload(const WorkloadSpec &workload) {
  Register(workload);
  std::vector<JobSchedule> out;
  for (const auto &j : workload.jobs) out.push_back(ScheduleJob(workload.id, j.id));
  return out;
}

void Scheduler::RemoveJob(const std::string &job_id) {
  std::set<std::size_t> touched;
  for (const auto &id : placement_.PlacedTaskIds()) {
    const TaskSpec *t = placement_.FindTask(id);
    if (t->job_id != job_id) continue;
    touched.insert(*placement_.NodeOf(id));
    placement_.Remove(id);
  }
  for (std::size_t n : touched) {
    auto it = schemes_.find(n);
    if (it == schemes_.end()) continue;
    RotationScheme &s = it->second;
    const auto sharing = placement_.SharingSet(n);
    std::set<std::string> jobs;
    for (const auto &t : sharing) jobs.insert(t.job_id);
    if (jobs.size() < 2 || DeclaredLoad(sharing) <= cluster_.nodes[n].link_bandwidth) {
      schemes_.erase(it);
      continue;
    }
    // Re-express the remaining rotations against the new reference task.
    const LinkSearch search(sharing, cluster_.nodes[n].link_bandwidth, params_.di_pre,
                            params_.period);
    const int base = s.index.contains(search.reference_task())
                         ? s.index.at(search.reference_task())
                         : 0;
    std::vector<int> index(search.groups().size(), 0);
    for (std::size_t g = 1; g < search.groups().size(); ++g) {
      const auto &grp = search.groups()[g];
      const int old = s.index.contains(grp.task_ids.front()) ? s.index.at(grp.task_ids.front()) : 0;
      int v = ((old - base) % params_.di_pre + params_.di_pre) % params_.di_pre;
      if (params_.di_pre % grp.mul == 0) v %= grp.radix;
      index[g] = v;
    }
    s = search.ToScheme(n, index);
  }
}

void Scheduler::UpdateTask(const TaskSpec &task) {
  placement_.UpdateTask(task);
  for (auto &w : workloads_) {
    for (auto &j : w.jobs) {
      for (auto &t : j.tasks) {
        if (t.id == task.id) t = task;
      }
    }
  }
}

void Scheduler::SetScheme(std::size_t node, RotationScheme scheme) {
  schemes_[node] = std::move(scheme);
}

}  // namespace metronome
