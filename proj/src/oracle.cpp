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

#include "metronome/oracle.hpp"

#include "metronome/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace metronome {

namespace {

struct LinkBest {
  double xi = 0.0;
  double psi = std::numbers::pi;
  bool contended = false;
  RotationScheme scheme;
};

LinkBest SolveLink(std::size_t node, const std::vector<TaskSpec> &sharing,
                   double capacity, int di_pre, const PeriodParams &params) {
  LinkBest best;
  best.scheme.node = node;
  best.scheme.di_pre = di_pre;
  if (sharing.empty()) return best;
  const UnifiedPeriod unified = UnifyPeriodsOrFallback(sharing, params);
  const std::string ref_job = HighestPriorityTask(sharing).job_id;
  std::vector<CircleAbstraction> circles;
  std::vector<std::string> jobs;
  std::vector<std::size_t> group_of;
  std::vector<int> radix;
  for (const auto &t : sharing) {
    circles.push_back(Abstract(t, unified));
    auto it = std::find(jobs.begin(), jobs.end(), t.job_id);
    if (it == jobs.end()) {
      jobs.push_back(t.job_id);
      const auto &c = circles.back();
      const bool fixed = t.job_id == ref_job || c.alpha <= 0.0;
      // Rotations stay inside [0, 2π/mul).
      int r = 0;
      while (!fixed && kTwoPi * r / di_pre < kTwoPi / c.mul - 1e-12) ++r;
      radix.push_back(fixed ? 1 : r);
      it = jobs.end() - 1;
    }
    group_of.push_back(static_cast<std::size_t>(it - jobs.begin()));
  }
  best.contended = MinCommInterval(circles, capacity).has_value();
  std::vector<int> index(jobs.size(), 0);
  bool any = false;
  std::vector<int> best_index;
  while (true) {
    for (std::size_t k = 0; k < circles.size(); ++k) {
      circles[k].rotation = kTwoPi * index[group_of[k]] / di_pre;
    }
    const double xi = LinkUtilization(DemandProfile(circles), capacity);
    const double psi = MinCommInterval(circles, capacity).value_or(std::numbers::pi);
    if (!any || xi > best.xi + 1e-12 ||
        (xi >= best.xi - 1e-12 && psi > best.psi + 1e-12)) {
      any = true;
      best.xi = xi;
      best.psi = psi;
      best_index = index;
    }
    bool advanced = false;
    for (std::size_t g = jobs.size(); g-- > 0;) {
      if (++index[g] < radix[g]) {
        advanced = true;
        break;
      }
      index[g] = 0;
    }
    if (!advanced) break;
  }
  best.scheme.t_l = unified.t_l;
  best.scheme.reference = HighestPriorityTask(sharing).id;
  for (std::size_t k = 0; k < sharing.size(); ++k) {
    best.scheme.index[sharing[k].id] = best_index[group_of[k]];
  }
  best.scheme.DeriveShifts();
  return best;
}

std::string LinkKey(std::size_t node, const std::vector<TaskSpec> &sharing) {
  std::string key = std::to_string(node);
  for (const auto &t : sharing) key += "|" + t.id;
  return key;
}

class Evaluator {
 public:
  Evaluator(const ClusterSpec &cluster, const std::vector<WorkloadSpec> &workloads,
            int di_pre, const PeriodParams &params)
      : cluster_(cluster), workloads_(workloads), di_pre_(di_pre), params_(params) {}

  OracleResult Evaluate(const Placement &placement) {
    OracleResult r;
    r.placement = placement;
    std::vector<double> capacity;
    std::optional<double> psi;
    for (std::size_t n = 0; n < cluster_.size(); ++n) {
      const auto sharing = placement.SharingSet(n);
      const double b = cluster_.nodes[n].link_bandwidth;
      const std::string key = LinkKey(n, sharing);
      auto it = memo_.find(key);
      if (it == memo_.end()) {
        it = memo_.emplace(key, SolveLink(n, sharing, b, di_pre_, params_)).first;
      }
      const LinkBest &lb = it->second;
      r.xi.push_back(lb.xi);
      capacity.push_back(b);
      if (lb.contended) {
        psi = psi ? std::min(*psi, lb.psi) : lb.psi;
        r.schemes[n] = lb.scheme;
      }
    }
    r.objectives.gamma = AvgBandwidthUtilization(r.xi, capacity, cluster_.b_max);
    r.objectives.lambda = TotalLatency(placement, workloads_, cluster_.latency);
    r.objectives.psi = psi.value_or(std::numbers::pi);
    return r;
  }

 private:
  const ClusterSpec &cluster_;
  const std::vector<WorkloadSpec> &workloads_;
  int di_pre_;
  PeriodParams params_;
  std::map<std::string, LinkBest> memo_;
};

}  // namespace

OracleResult OracleSolve(const ClusterSpec &cluster,
                         const std::vector<WorkloadSpec> &workloads, int di_pre,
                         const PeriodParams &params, const OracleLimits &limits) {
  std::vector<const JobSpec *> jobs;
  for (const auto &w : workloads) {
    for (const auto &j : w.jobs) jobs.push_back(&j);
  }
  if (cluster.size() > limits.max_nodes || jobs.size() > limits.max_jobs ||
      di_pre > limits.max_di_pre || di_pre <= 0 ||
      std::any_of(jobs.begin(), jobs.end(), [&](const JobSpec *j) {
        return j->tasks.size() > limits.max_tasks_per_job;
      })) {
    throw Error(ErrorKind::kInstanceTooLarge, "instance exceeds the oracle limits");
  }
  // Per job: every node tuple for its tasks, then "not deployed".
  const std::size_t n = cluster.size();
  std::vector<std::size_t> options;
  for (const JobSpec *j : jobs) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < j->tasks.size(); ++k) count *= n;
    options.push_back(count + 1);
  }
  Evaluator eval(cluster, workloads, di_pre, params);
  std::optional<OracleResult> best;
  std::size_t evaluated = 0;
  std::vector<std::size_t> choice(jobs.size(), 0);
  while (true) {
    Placement p(cluster);
    for (const auto &w : workloads) p.RegisterWorkload(w);
    bool ok = true;
    for (std::size_t j = 0; j < jobs.size() && ok; ++j) {
      if (choice[j] + 1 == options[j]) continue;  // not deployed
      std::size_t code = choice[j];
      // First task is the most significant digit.
      std::vector<std::size_t> nodes(jobs[j]->tasks.size());
      for (std::size_t k = nodes.size(); k-- > 0;) {
        nodes[k] = code % n;
        code /= n;
      }
      for (std::size_t k = 0; k < nodes.size() && ok; ++k) {
        const TaskSpec &t = jobs[j]->tasks[k];
        if (t.declares_bandwidth() && t.bandwidth > cluster.nodes[nodes[k]].link_bandwidth) {
          ok = false;
        } else if (!p.residual(nodes[k]).Covers(t.request)) {
          ok = false;
        } else {
          p.Place(t, nodes[k]);
        }
      }
    }
    if (ok && !ContentionGraphHasCycle(p, cluster)) {
      ++evaluated;
      OracleResult r = eval.Evaluate(p);
      if (!best || CompareObjectives(r.objectives, best->objectives) > 0) best = std::move(r);
    }
    std::size_t j = jobs.size();
    bool done = true;
    while (j > 0) {
      --j;
      if (++choice[j] < options[j]) {
        done = false;
        break;
      }
      choice[j] = 0;
    }
    if (done) break;
  }
  best->placements_evaluated = evaluated;
  return *best;
}

OracleResult OracleSolveRotations(const ClusterSpec &cluster,
                                  const std::vector<WorkloadSpec> &workloads,
                                  const Placement &placement, int di_pre,
                                  const PeriodParams &params) {
  Evaluator eval(cluster, workloads, di_pre, params);
  OracleResult r = eval.Evaluate(placement);
  r.placements_evaluated = 1;
  return r;
}

}  // namespace metronome
