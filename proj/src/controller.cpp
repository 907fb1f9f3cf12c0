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

#include "metronome/controller.hpp"

#include "metronome/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace metronome {

double PositiveMod(double x, double m) {
  if (!(m > 0.0)) return x;
  double r = std::fmod(x, m);
  if (r < 0.0) r += m;
  if (r >= m) r = 0.0;
  return r;
}

AffinityGraph BuildAffinityGraph(const Placement &placement, const ClusterSpec &cluster,
                                 const std::map<std::size_t, RotationScheme> &schemes) {
  AffinityGraph g;
  std::set<std::string> seen;
  for (const auto &id : placement.PlacedTaskIds()) {
    const TaskSpec *t = placement.FindTask(id);
    if (!t->declares_bandwidth()) continue;
    auto [it, fresh] = g.priority.emplace(t->job_id, KeyOf(*t));
    if (!fresh && KeyOf(*t) > it->second) it->second = KeyOf(*t);
    if (seen.insert(t->job_id).second) g.jobs.push_back(t->job_id);
  }
  for (const auto &[job, node] : ContentionEdges(placement, cluster)) {
    AffinityEdge e;
    e.job_id = job;
    e.node = node;
    auto s = schemes.find(node);
    if (s != schemes.end()) {
      e.t_l = s->second.t_l;
      for (const auto &t : placement.SharingSet(node)) {
        if (t.job_id != job) continue;
        auto shift = s->second.time_shifts.find(t.id);
        if (shift != s->second.time_shifts.end()) e.shift = shift->second;
        break;
      }
    }
    g.edges.push_back(e);
  }
  return g;
}

GlobalOffsets GlobalOffset(const AffinityGraph &graph, const Placement *placement) {
  GlobalOffsets out;
  std::map<std::string, std::vector<const AffinityEdge *>> by_job;
  std::map<std::size_t, std::vector<const AffinityEdge *>> by_link;
  for (const auto &e : graph.edges) {
    by_job[e.job_id].push_back(&e);
    by_link[e.node].push_back(&e);
  }
  // Highest-priority unvisited job starts each component.
  std::vector<std::string> order = graph.jobs;
  std::stable_sort(order.begin(), order.end(), [&](const auto &a, const auto &b) {
    return graph.priority.at(a) > graph.priority.at(b);
  });
  std::set<std::size_t> links_done;
  for (const auto &root : order) {
    if (out.job.contains(root)) continue;
    out.references.push_back(root);
    out.job[root] = 0.0;
    std::queue<std::string> q;
    q.push(root);
    while (!q.empty()) {
      const std::string k = q.front();
      q.pop();
      for (const AffinityEdge *ek : by_job[k]) {
        if (!links_done.insert(ek->node).second) continue;
        const double base = out.job[k] - ek->shift;
        for (const AffinityEdge *ej : by_link[ek->node]) {
          if (ej->job_id == k) continue;
          if (out.job.contains(ej->job_id)) {
            throw Error(ErrorKind::kCycleDetected,
                        "job '" + ej->job_id + "' reached twice in the affinity graph");
          }
          out.job[ej->job_id] = PositiveMod(base + ej->shift, ek->t_l);
          out.parent[ej->job_id] = k;
          out.parent_link[ej->job_id] = ek->node;
          q.push(ej->job_id);
        }
      }
    }
  }
  if (placement) {
    for (const auto &id : placement->PlacedTaskIds()) {
      const TaskSpec *t = placement->FindTask(id);
      auto it = out.job.find(t->job_id);
      if (it != out.job.end()) out.task[id] = it->second;
    }
  }
  return out;
}

RotationScheme OfflineRecalculate(std::span<const TaskSpec> sharing, std::size_t node,
                                  double capacity, int di_pre, const PeriodParams &params,
                                  RecalcSearch mode, const RotationScheme *current,
                                  std::uint64_t max_enumeration) {
  const LinkSearch search(sharing, capacity, di_pre, params);
  const std::vector<int> now =
      current ? search.FromScheme(*current) : std::vector<int>(search.groups().size(), 0);
  const SearchResult r = OptimalRotation(search, mode, now, max_enumeration);
  return search.ToScheme(node, r.index);
}

MonitorState::MonitorState(double baseline, MonitorParams params)
    : baseline_(baseline), params_(params) {
  if (!(baseline > 0.0)) throw Error(ErrorKind::kInvalidArgument, "baseline must be positive");
  if (params.window <= 0) throw Error(ErrorKind::kInvalidArgument, "window must be positive");
}

void MonitorState::Push(double duration) {
  window_.push_back(duration);
  while (static_cast<int>(window_.size()) > params_.window) window_.pop_front();
}

int MonitorState::SlowCount() const {
  const double limit = params_.a_t * baseline_;
  return static_cast<int>(std::count_if(window_.begin(), window_.end(),
                                        [&](double d) { return d > limit; }));
}

MonitorAction MonitorTick(MonitorState &state, double duration, Priority priority,
                          double assigned_shift, double observed_phase, double t_l) {
  state.Push(duration);
  MonitorAction a;
  // High-priority tasks are never touched.
  if (priority == Priority::kHigh) return a;
  if (state.SlowCount() <= state.params().o_t) return a;
  a.pause = true;
  a.realign = t_l > 0.0 ? PositiveMod(assigned_shift - observed_phase, t_l) : 0.0;
  state.Clear();
  return a;
}

PatternDecision DetectPatternChange(const TaskSpec &declared, double observed_period,
                                    double observed_duty, int recent_pauses, double e_t) {
  if (recent_pauses >= 3) return PatternDecision::kRecalibrate;
  auto deviates = [&](double seen, double want) {
    if (want == 0.0) return std::abs(seen) > e_t;
    return std::abs(seen - want) / std::abs(want) > e_t;
  };
  if (deviates(observed_period, declared.period) ||
      deviates(observed_duty, declared.duty_cycle)) {
    return PatternDecision::kRecalibrate;
  }
  return PatternDecision::kUnchanged;
}

}  // namespace metronome
