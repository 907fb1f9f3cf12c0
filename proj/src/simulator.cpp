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

#include "metronome/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>

namespace metronome {

namespace {

constexpr double kTimeEps = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Phase { kNotArrived, kQueued, kDelay, kComm, kCompute, kDone, kRejected };

struct Flow {
  std::size_t job = 0;     // ignored for background flows
  std::size_t node = 0;
  double remaining = 0.0;  // bits
  double cap = 0.0;        // demand, bits/s
  double rate = 0.0;
  bool background = false;
  bool active = true;
};

struct JobRt {
  JobSpec spec;  // declared pattern (updated on recalibration)
  std::string workload_id;
  double arrival = 0.0;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;
  bool low_comm = false;
  // Real behaviour; differs from the declaration after a pattern change.
  double true_period = 0.0;
  double true_duty = 0.0;
  Phase phase = Phase::kNotArrived;
  double timer = kInf;  // end of delay / compute / LowComm run
  int done = 0;
  int target = 0;
  bool started = false;
  double comm_start = 0.0;
  int open_flows = 0;
  double idle = 0.0;
  bool needs_align = false;
  std::optional<MonitorState> monitor;
  std::deque<int> pause_iters;
  bool attempted = false;
  JobReport report;
};

// Per contended link: what the controller needs to align jobs on it.
struct LinkRt {
  double t_l = 0.0;
  std::map<std::string, double> shift;   // job -> seconds
  std::map<std::string, double> period;  // job -> effective period
  std::optional<double> origin;
};

struct Target {
  double delay = 0.0;
  std::string parent;
  double parent_start = 0.0;
  double parent_shift = 0.0;
  double shift = 0.0;
  double period = 0.0;
};

Policy ToPolicy(SimScheduler s) {
  switch (s) {
    case SimScheduler::kMetronome: return Policy::kMetronome;
    case SimScheduler::kExclusive: return Policy::kExclusive;
    case SimScheduler::kLatencyOnly: return Policy::kLatencyOnly;
    case SimScheduler::kAgnostic:
    case SimScheduler::kIdeal: return Policy::kAgnostic;
  }
  return Policy::kAgnostic;
}

class Engine {
 public:
  Engine(const Trace &trace, const ClusterSpec &cluster, const SimulationConfig &config,
         const std::vector<std::uint64_t> &seeds, Policy policy)
      : cluster_(cluster), config_(config), scheduler_(cluster, config.scheduling, policy),
        regulate_(policy == Policy::kMetronome) {
    std::size_t k = 0;
    for (const auto &w : trace.workloads) {
      workloads_.push_back(w);
      for (const auto &j : w.jobs) {
        JobRt rt;
        rt.spec = j;
        rt.workload_id = w.id;
        rt.arrival = w.arrival;
        rt.seed = seeds.at(k++);
        rt.rng.seed(rt.seed);
        rt.low_comm = j.low_comm();
        const TaskSpec &t0 = j.tasks.front();
        rt.true_period = t0.period;
        rt.true_duty = t0.duty_cycle;
        if (!rt.low_comm) {
          rt.target = static_cast<int>(j.iterations);
          if (rt.target <= 0 && j.duration > 0.0) {
            rt.target = static_cast<int>(std::ceil(j.duration / t0.period));
          }
          rt.target = std::max(rt.target, 1);
        }
        rt.report.id = j.id;
        rt.report.workload_id = w.id;
        rt.report.priority = j.priority;
        rt.report.arrival = w.arrival;
        index_[j.id] = jobs_.size();
        jobs_.push_back(std::move(rt));
      }
    }
    for (const auto &b : config.background) {
      if (b.node >= cluster.size()) throw Error(ErrorKind::kConfig, "background flow on unknown node");
      Flow f;
      f.node = b.node;
      f.cap = b.rate;
      f.remaining = kInf;
      f.background = true;
      f.active = false;
      background_.push_back(flows_.size());
      flows_.push_back(f);
    }
    bucket_count_ = 0;
    integral_.assign(cluster.size(), 0.0);
    series_.assign(cluster.size(), {});
  }

  SimulationReport Run() {
    std::vector<std::size_t> arrival_order(workloads_.size());
    std::iota(arrival_order.begin(), arrival_order.end(), 0);
    std::stable_sort(arrival_order.begin(), arrival_order.end(), [&](auto a, auto b) {
      return workloads_[a].arrival < workloads_[b].arrival;
    });
    std::size_t next_arrival = 0;
    std::vector<PatternChange> changes = config_.pattern_changes;
    std::stable_sort(changes.begin(), changes.end(),
                     [](const auto &a, const auto &b) { return a.time < b.time; });
    std::size_t next_change = 0;

    while (true) {
      if (Finished(next_arrival == arrival_order.size())) break;
      ComputeRates();
      double t_next = config_.max_time;
      if (next_arrival < arrival_order.size()) {
        t_next = std::min(t_next, workloads_[arrival_order[next_arrival]].arrival);
      }
      if (next_change < changes.size()) t_next = std::min(t_next, changes[next_change].time);
      for (const auto &b : config_.background) {
        if (b.start > now_ + kTimeEps) t_next = std::min(t_next, b.start);
        if (b.end > now_ + kTimeEps) t_next = std::min(t_next, b.end);
      }
      for (const auto &j : jobs_) t_next = std::min(t_next, j.timer);
      for (const auto &f : flows_) {
        if (f.active && !f.background && f.rate > 0.0) {
          t_next = std::min(t_next, now_ + f.remaining / f.rate);
        }
      }
      t_next = std::max(t_next, now_);
      Advance(t_next);
      if (now_ >= config_.max_time - kTimeEps) break;

      for (std::size_t i = 0; i < config_.background.size(); ++i) {
        const auto &b = config_.background[i];
        flows_[background_[i]].active = now_ >= b.start - kTimeEps && now_ < b.end - kTimeEps;
      }
      while (next_change < changes.size() && changes[next_change].time <= now_ + kTimeEps) {
        ApplyPatternChange(changes[next_change++]);
      }
      FinishFlows();
      for (std::size_t j = 0; j < jobs_.size(); ++j) {
        if (jobs_[j].timer <= now_ + kTimeEps) OnTimer(j);
      }
      bool arrived = false;
      while (next_arrival < arrival_order.size() &&
             workloads_[arrival_order[next_arrival]].arrival <= now_ + kTimeEps) {
        Arrive(workloads_[arrival_order[next_arrival++]]);
        arrived = true;
      }
      if (arrived) TryAdmit();
    }
    return BuildReport();
  }

 private:
  bool Finished(bool no_more_arrivals) {
    if (!no_more_arrivals) return false;
    bool queued = false;
    for (auto &j : jobs_) {
      if (j.phase == Phase::kDelay || j.phase == Phase::kComm || j.phase == Phase::kCompute) {
        return false;
      }
      if (j.phase == Phase::kQueued) queued = true;
    }
    if (queued) {
      // Nothing left that could free resources.
      for (auto &j : jobs_) {
        if (j.phase == Phase::kQueued) j.phase = Phase::kRejected;
      }
    }
    return true;
  }

  void ComputeRates() {
    std::map<std::size_t, std::vector<std::size_t>> by_node;
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      flows_[i].rate = 0.0;
      if (flows_[i].active) by_node[flows_[i].node].push_back(i);
    }
    // Max-min fair water-filling with demand caps.
    for (auto &[node, ids] : by_node) {
      std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return flows_[a].cap != flows_[b].cap ? flows_[a].cap < flows_[b].cap : a < b;
      });
      double left = cluster_.nodes[node].link_bandwidth;
      std::size_t remaining = ids.size();
      for (std::size_t id : ids) {
        const double share = left / static_cast<double>(remaining);
        const double r = std::min(flows_[id].cap, share);
        flows_[id].rate = r;
        left -= r;
        --remaining;
      }
    }
  }

  void Advance(double t) {
    const double dt = t - now_;
    if (dt > 0.0) {
      std::vector<double> load(cluster_.size(), 0.0);
      for (auto &f : flows_) {
        if (!f.active) continue;
        if (!f.background) {
          f.remaining -= f.rate * dt;
          load[f.node] += f.rate;
        }
      }
      for (std::size_t n = 0; n < cluster_.size(); ++n) {
        if (load[n] == 0.0) continue;
        integral_[n] += load[n] * dt;
        // Spread over the utilization buckets touched by [now, t).
        double a = now_;
        while (a < t - kTimeEps) {
          const auto b = static_cast<std::size_t>(std::floor(a / config_.bucket + 1e-12));
          const double edge = std::min(t, (b + 1) * config_.bucket);
          if (series_[n].size() <= b) series_[n].resize(b + 1, 0.0);
          series_[n][b] += load[n] * (edge - a);
          a = edge;
        }
      }
    }
    now_ = t;
  }

  void FinishFlows() {
    for (auto &f : flows_) {
      if (!f.active || f.background) continue;
      if (f.remaining > 1e-9 * f.cap * 1e-3 && !(f.rate > 0.0 && f.remaining / f.rate < 1e-12)) {
        continue;
      }
      f.active = false;
      JobRt &j = jobs_[f.job];
      if (--j.open_flows == 0) EndComm(f.job);
    }
    std::erase_if(flows_, [](const Flow &f) { return !f.active && !f.background; });
    background_.clear();
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      if (flows_[i].background) background_.push_back(i);
    }
  }

  void OnTimer(std::size_t j) {
    JobRt &rt = jobs_[j];
    rt.timer = kInf;
    switch (rt.phase) {
      case Phase::kDelay: StartComm(j); break;
      case Phase::kCompute:
        if (rt.low_comm) {
          Finish(j);
        } else {
          IterationDone(j);
        }
        break;
      default: break;
    }
  }

  void Arrive(const WorkloadSpec &w) {
    scheduler_.Register(w);
    for (const auto &job : w.jobs) {
      JobRt &rt = jobs_[index_.at(job.id)];
      rt.phase = Phase::kQueued;
      queue_.push_back(index_.at(job.id));
    }
  }

  void TryAdmit() {
    std::vector<std::size_t> admitted;
    std::deque<std::size_t> still;
    for (std::size_t j : queue_) {
      JobRt &rt = jobs_[j];
      const JobSchedule s = scheduler_.ScheduleJob(rt.workload_id, rt.spec.id);
      const bool first = !rt.attempted;
      rt.attempted = true;
      if (!s.accepted) {
        if (first) admissions_.push_back({now_, rt.spec.id, false, s.reason});
        if (config_.retry_rejected) {
          still.push_back(j);
        } else {
          rt.phase = Phase::kRejected;
        }
        continue;
      }
      admissions_.push_back({now_, rt.spec.id, true, ""});
      rt.report.accepted = true;
      rt.report.accepted_on_arrival = first;
      rt.report.admit_time = now_;
      for (const auto &t : rt.spec.tasks) {
        rt.report.nodes.push_back(*scheduler_.placement().NodeOf(t.id));
      }
      if (regulate_) StageThree(s);
      admitted.push_back(j);
    }
    queue_ = std::move(still);
    if (admitted.empty()) return;
    if (regulate_) ControllerUpdate();
    // Parents first so their anchors exist when children align.
    std::stable_sort(admitted.begin(), admitted.end(), [&](std::size_t a, std::size_t b) {
      return KeyOf(jobs_[a].spec.tasks.front()) > KeyOf(jobs_[b].spec.tasks.front());
    });
    for (std::size_t j : admitted) Start(j);
  }

  void StageThree(const JobSchedule &s) {
    for (const auto &o : s.outcomes) {
      if (!o.scheme) continue;
      const bool recalc = config_.stage_three ? !o.skip_phase_three : true;
      if (!recalc) continue;
      Recalculate(o.node, config_.stage_three ? config_.recalc : RecalcSearch::kCompact);
    }
  }

  void Recalculate(std::size_t node, RecalcSearch mode) {
    const auto sharing = scheduler_.placement().SharingSet(node);
    if (sharing.empty()) return;
    auto it = scheduler_.schemes().find(node);
    const RotationScheme *current = it == scheduler_.schemes().end() ? nullptr : &it->second;
    scheduler_.SetScheme(node, OfflineRecalculate(sharing, node, cluster_.nodes[node].link_bandwidth,
                                                  config_.scheduling.di_pre,
                                                  config_.scheduling.period, mode, current,
                                                  config_.scheduling.max_enumeration));
  }

  void ControllerUpdate() {
    const auto &placement = scheduler_.placement();
    GlobalOffsets offsets;
    try {
      offsets = GlobalOffset(BuildAffinityGraph(placement, cluster_, scheduler_.schemes()),
                             &placement);
    } catch (const Error &) {
      offsets = {};
    }
    std::map<std::size_t, LinkRt> links;
    std::map<std::string, double> idle;
    for (const auto &[node, scheme] : scheduler_.schemes()) {
      const auto sharing = placement.SharingSet(node);
      if (sharing.empty()) continue;
      LinkRt lr;
      const UnifiedPeriod up = UnifyPeriodsOrFallback(sharing, config_.scheduling.period);
      lr.t_l = up.t_l;
      for (const auto &t : sharing) {
        const TaskPeriod &tp = up.at(t.id);
        lr.period[t.job_id] = tp.effective_period;
        auto s = scheme.time_shifts.find(t.id);
        lr.shift[t.job_id] = s == scheme.time_shifts.end() ? 0.0 : s->second;
        idle[t.job_id] = std::max(idle[t.job_id], tp.injected_idle);
      }
      auto old = links_.find(node);
      if (old != links_.end()) lr.origin = old->second.origin;
      links.emplace(node, std::move(lr));
    }
    for (auto &rt : jobs_) {
      if (rt.low_comm || rt.phase == Phase::kDone || rt.phase == Phase::kRejected ||
          rt.phase == Phase::kQueued || rt.phase == Phase::kNotArrived) {
        continue;
      }
      const std::string &id = rt.spec.id;
      auto p = offsets.parent.find(id);
      auto op = parent_.find(id);
      std::optional<std::pair<std::string, std::size_t>> now_parent;
      if (p != offsets.parent.end()) now_parent.emplace(p->second, offsets.parent_link.at(id));
      bool changed = now_parent != (op == parent_.end() ? std::nullopt : std::optional(op->second));
      if (now_parent && !changed) {
        const auto &l_old = links_.at(now_parent->second);
        const auto &l_new = links.at(now_parent->second);
        changed = l_old.shift.at(id) != l_new.shift.at(id) ||
                  l_old.shift.at(now_parent->first) != l_new.shift.at(now_parent->first);
      }
      if (changed && now_parent) rt.needs_align = true;
      const double new_idle = idle.contains(id) ? idle.at(id) : 0.0;
      if (new_idle != rt.idle || !rt.monitor) {
        rt.idle = new_idle;
        rt.monitor.emplace(rt.spec.tasks.front().period + rt.idle, config_.monitor);
      }
    }
    parent_.clear();
    for (const auto &[job, par] : offsets.parent) {
      parent_[job] = {par, offsets.parent_link.at(job)};
    }
    links_ = std::move(links);
  }

  void Start(std::size_t j) {
    JobRt &rt = jobs_[j];
    if (rt.low_comm) {
      rt.phase = Phase::kCompute;
      rt.timer = now_ + (rt.spec.duration > 0.0 ? rt.spec.duration : 1.0);
      return;
    }
    if (!rt.monitor) {
      rt.monitor.emplace(rt.spec.tasks.front().period + rt.idle, config_.monitor);
    }
    double delay = 0.0;
    if (regulate_) {
      if (auto tgt = TargetFor(rt)) delay = tgt->delay;
      rt.needs_align = false;
    }
    BeginNext(j, delay);
  }

  void BeginNext(std::size_t j, double delay) {
    JobRt &rt = jobs_[j];
    if (delay > kTimeEps) {
      rt.phase = Phase::kDelay;
      rt.timer = now_ + delay;
    } else {
      StartComm(j);
    }
  }

  std::optional<Target> TargetFor(const JobRt &rt) {
    auto p = parent_.find(rt.spec.id);
    if (p == parent_.end()) return std::nullopt;
    const auto &[parent_id, node] = p->second;
    auto lit = links_.find(node);
    if (lit == links_.end()) return std::nullopt;
    LinkRt &lr = lit->second;
    const JobRt &par = jobs_[index_.at(parent_id)];
    double anchor;
    if (par.phase == Phase::kDelay) {
      anchor = par.timer;
    } else if (par.started) {
      anchor = par.comm_start;
    } else {
      return std::nullopt;
    }
    Target t;
    t.parent = parent_id;
    t.parent_start = anchor;
    t.parent_shift = lr.shift.at(parent_id);
    t.shift = lr.shift.at(rt.spec.id);
    t.period = lr.period.at(rt.spec.id);
    // The parent repeats every p_par; keep the link origin continuous across
    // decisions when that is shorter than the link period.
    double origin = anchor - t.parent_shift;
    const double p_par = lr.period.at(parent_id);
    if (lr.origin && p_par < lr.t_l - 1e-9) {
      const int reps = std::max(1, static_cast<int>(std::lround(lr.t_l / p_par)));
      double best = origin;
      double best_d = kInf;
      for (int k = 0; k < reps; ++k) {
        const double cand = origin - k * p_par;
        double d = PositiveMod(cand - *lr.origin, lr.t_l);
        d = std::min(d, lr.t_l - d);
        if (d < best_d - 1e-12) {
          best_d = d;
          best = cand;
        }
      }
      origin = best;
    }
    lr.origin = origin;
    t.delay = PositiveMod(origin + t.shift - now_, t.period);
    if (t.period - t.delay <= config_.tick || t.delay <= config_.tick * 1e-3) t.delay = 0.0;
    return t;
  }

  void StartComm(std::size_t j) {
    JobRt &rt = jobs_[j];
    if (rt.started) rt.report.iterations.push_back(now_ - rt.comm_start);
    rt.started = true;
    rt.comm_start = now_;
    rt.report.iteration_start.push_back(now_);
    rt.phase = Phase::kComm;
    rt.open_flows = 0;
    for (std::size_t k = 0; k < rt.spec.tasks.size(); ++k) {
      const TaskSpec &t = rt.spec.tasks[k];
      if (!t.declares_bandwidth()) continue;
      const double bits = t.bandwidth * rt.true_period * rt.true_duty;
      if (bits <= 0.0) continue;
      Flow f;
      f.job = j;
      f.node = rt.report.nodes[k];
      f.remaining = bits;
      f.cap = t.bandwidth;
      flows_.push_back(f);
      ++rt.open_flows;
    }
    if (rt.open_flows == 0) EndComm(j);
  }

  void EndComm(std::size_t j) {
    JobRt &rt = jobs_[j];
    std::normal_distribution<double> normal(0.0, 1.0);
    const double noise = config_.sigma > 0.0 ? std::exp(config_.sigma * normal(rt.rng)) : 1.0;
    const double compute = rt.true_period * (1.0 - rt.true_duty) * noise + (regulate_ ? rt.idle : 0.0);
    rt.phase = Phase::kCompute;
    rt.timer = now_ + compute;
  }

  void IterationDone(std::size_t j) {
    JobRt &rt = jobs_[j];
    ++rt.done;
    if (rt.done >= rt.target) {
      Finish(j);
      return;
    }
    double delay = 0.0;
    if (regulate_) {
      const double natural = now_ - rt.comm_start;
      std::optional<Target> tgt = TargetFor(rt);
      bool paused = false;
      if (config_.monitoring && rt.monitor) {
        const MonitorAction a =
            MonitorTick(*rt.monitor, natural, rt.spec.priority, tgt ? tgt->delay : 0.0, 0.0,
                        tgt ? tgt->period : 0.0);
        if (a.pause && tgt) {
          paused = true;
          delay = tgt->delay;
          rt.pause_iters.push_back(rt.done);
          ++rt.report.pauses;
          Log("pause", rt, delay, *tgt);
        }
        while (!rt.pause_iters.empty() &&
               rt.pause_iters.front() <= rt.done - 3 * config_.monitor.window) {
          rt.pause_iters.pop_front();
        }
        const PatternDecision d = DetectPatternChange(
            rt.spec.tasks.front(), rt.true_period, rt.true_duty,
            static_cast<int>(rt.pause_iters.size()), config_.scheduling.period.e_t);
        if (d == PatternDecision::kRecalibrate) {
          Recalibrate(j);
          tgt = TargetFor(rt);
          if (!paused && tgt) delay = tgt->delay;
          rt.needs_align = false;
        }
      }
      if (!paused && rt.needs_align) {
        rt.needs_align = false;
        if (tgt) {
          delay = tgt->delay;
          if (delay > 0.0) Log("align", rt, delay, *tgt);
        }
      }
    }
    BeginNext(j, delay);
  }

  void Recalibrate(std::size_t j) {
    JobRt &rt = jobs_[j];
    for (auto &t : rt.spec.tasks) {
      t.period = rt.true_period;
      t.duty_cycle = rt.true_duty;
      scheduler_.UpdateTask(t);
    }
    rt.pause_iters.clear();
    std::set<std::size_t> nodes(rt.report.nodes.begin(), rt.report.nodes.end());
    for (std::size_t n : nodes) {
      if (scheduler_.schemes().contains(n)) {
        Recalculate(n, config_.stage_three ? config_.recalc : RecalcSearch::kCompact);
      }
    }
    ControllerUpdate();
    rt.monitor.emplace(rt.spec.tasks.front().period + rt.idle, config_.monitor);
    Readjustment r;
    r.time = now_;
    r.job_id = rt.spec.id;
    r.action = "recalibrate";
    readjustments_.push_back(r);
  }

  void Log(const char *action, const JobRt &rt, double amount, const Target &tgt) {
    Readjustment r;
    r.time = now_;
    r.job_id = rt.spec.id;
    r.action = action;
    r.amount = amount;
    r.next_start = now_ + amount;
    r.parent = tgt.parent;
    r.parent_start = tgt.parent_start;
    r.parent_shift = tgt.parent_shift;
    r.shift = tgt.shift;
    r.period = tgt.period;
    readjustments_.push_back(r);
  }

  void ApplyPatternChange(const PatternChange &c) {
    auto it = index_.find(c.job_id);
    if (it == index_.end()) throw Error(ErrorKind::kConfig, "pattern change for unknown job '" + c.job_id + "'");
    JobRt &rt = jobs_[it->second];
    if (c.duty_cycle > 0.0) rt.true_duty = c.duty_cycle;
    if (c.period > 0.0) rt.true_period = c.period;
  }

  void Finish(std::size_t j) {
    JobRt &rt = jobs_[j];
    if (rt.started) rt.report.iterations.push_back(now_ - rt.comm_start);
    rt.phase = Phase::kDone;
    rt.timer = kInf;
    rt.report.completion_time = now_;
    scheduler_.RemoveJob(rt.spec.id);
    if (regulate_) ControllerUpdate();
    TryAdmit();
  }

  SimulationReport BuildReport() {
    SimulationReport r;
    r.seed = 0;
    r.sigma = config_.sigma;
    r.tick = config_.tick;
    r.bucket = config_.bucket;
    for (auto &rt : jobs_) {
      JobReport jr = rt.report;
      if (!jr.iterations.empty()) {
        jr.mean_iteration = std::accumulate(jr.iterations.begin(), jr.iterations.end(), 0.0) /
                            static_cast<double>(jr.iterations.size());
        jr.per_1000 = 1000.0 * jr.mean_iteration;
      }
      if (rt.phase == Phase::kDone) r.tct = std::max(r.tct, jr.completion_time);
      r.pause_count += jr.pauses;
      r.jobs.push_back(std::move(jr));
    }
    const double horizon = std::max(now_, kTimeEps);
    std::vector<double> xi;
    std::vector<double> cap;
    for (std::size_t n = 0; n < cluster_.size(); ++n) {
      LinkReport lr;
      lr.node = n;
      lr.node_id = cluster_.nodes[n].id;
      const double b = cluster_.nodes[n].link_bandwidth;
      lr.utilization = integral_[n] / (b * horizon);
      const std::size_t buckets =
          static_cast<std::size_t>(std::ceil(horizon / config_.bucket - 1e-9));
      lr.series.assign(buckets, 0.0);
      for (std::size_t k = 0; k < std::min(buckets, series_[n].size()); ++k) {
        const double len = std::min(config_.bucket, horizon - k * config_.bucket);
        lr.series[k] = len > 0.0 ? series_[n][k] / (b * len) : 0.0;
      }
      xi.push_back(lr.utilization);
      cap.push_back(b);
      r.links.push_back(std::move(lr));
    }
    r.gamma = AvgBandwidthUtilization(xi, cap, cluster_.b_max);
    r.readjustments = readjustments_;
    r.admissions = admissions_;
    return r;
  }

  const ClusterSpec &cluster_;
  SimulationConfig config_;
  Scheduler scheduler_;
  bool regulate_;
  std::vector<WorkloadSpec> workloads_;
  std::vector<JobRt> jobs_;
  std::map<std::string, std::size_t> index_;
  std::vector<Flow> flows_;
  std::vector<std::size_t> background_;
  std::deque<std::size_t> queue_;
  std::map<std::size_t, LinkRt> links_;
  std::map<std::string, std::pair<std::string, std::size_t>> parent_;
  std::vector<Readjustment> readjustments_;
  std::vector<AdmissionRecord> admissions_;
  std::vector<double> integral_;
  std::vector<std::vector<double>> series_;
  std::size_t bucket_count_ = 0;
  double now_ = 0.0;
};

std::vector<std::uint64_t> JobSeeds(const Trace &trace, std::uint64_t seed) {
  // One master generator per run; each job gets its own stream in job order.
  std::mt19937_64 master(seed);
  std::vector<std::uint64_t> out;
  for (const auto &w : trace.workloads) {
    for (std::size_t k = 0; k < w.jobs.size(); ++k) out.push_back(master());
  }
  return out;
}

void Validate(const Trace &trace, const ClusterSpec &cluster, const SimulationConfig &config) {
  cluster.Validate();
  if (!(config.sigma >= 0.0)) throw Error(ErrorKind::kConfig, "sigma must be >= 0");
  if (!(config.tick > 0.0)) throw Error(ErrorKind::kConfig, "tick must be > 0");
  if (!(config.bucket > 0.0)) throw Error(ErrorKind::kConfig, "bucket must be > 0");
  std::set<std::string> ids;
  for (const auto &w : trace.workloads) {
    w.Validate();
    for (const auto &j : w.jobs) {
      if (!ids.insert(j.id).second) throw Error(ErrorKind::kConfig, "duplicate job id '" + j.id + "'");
      for (const auto &t : j.tasks) {
        if (!ids.insert("task:" + t.id).second) {
          throw Error(ErrorKind::kConfig, "duplicate task id '" + t.id + "'");
        }
      }
      if (!j.low_comm()) {
        const TaskSpec &t0 = j.tasks.front();
        for (const auto &t : j.tasks) {
          if (t.low_comm || t.period != t0.period || t.duty_cycle != t0.duty_cycle) {
            throw Error(ErrorKind::kConfig, "tasks of job '" + j.id + "' must share one pattern");
          }
        }
      }
    }
  }
}

}  // namespace

std::string_view ToString(SimScheduler s) {
  switch (s) {
    case SimScheduler::kMetronome: return "metronome";
    case SimScheduler::kAgnostic: return "agnostic";
    case SimScheduler::kExclusive: return "exclusive";
    case SimScheduler::kLatencyOnly: return "latency-only";
    case SimScheduler::kIdeal: return "ideal";
  }
  return "unknown";
}

SimScheduler ParseSimScheduler(std::string_view s) {
  if (s == "metronome") return SimScheduler::kMetronome;
  if (s == "agnostic") return SimScheduler::kAgnostic;
  if (s == "exclusive") return SimScheduler::kExclusive;
  if (s == "latency-only") return SimScheduler::kLatencyOnly;
  if (s == "ideal") return SimScheduler::kIdeal;
  throw Error(ErrorKind::kInvalidArgument, "unknown scheduler '" + std::string(s) + "'");
}

const JobReport *SimulationReport::FindJob(const std::string &id) const {
  for (const auto &j : jobs) {
    if (j.id == id) return &j;
  }
  return nullptr;
}

SimulationReport Simulate(const Trace &trace, const ClusterSpec &cluster,
                          const SimulationConfig &config) {
  Validate(trace, cluster, config);
  const auto seeds = JobSeeds(trace, trace.seed);
  SimulationReport report;
  if (config.scheduler != SimScheduler::kIdeal) {
    Engine engine(trace, cluster, config, seeds, ToPolicy(config.scheduler));
    report = engine.Run();
  } else {
    // Every job alone on its own copy of the cluster.
    SimulationConfig solo = config;
    solo.background.clear();
    std::size_t k = 0;
    for (const auto &w : trace.workloads) {
      for (const auto &j : w.jobs) {
        Trace one;
        one.seed = trace.seed;
        WorkloadSpec ws = w;
        ws.jobs = {j};
        ws.dependencies.clear();
        one.workloads = {ws};
        Engine engine(one, cluster, solo, {seeds[k++]}, Policy::kAgnostic);
        SimulationReport part = engine.Run();
        report.jobs.push_back(part.jobs.front());
        report.admissions.insert(report.admissions.end(), part.admissions.begin(),
                                 part.admissions.end());
        report.tct = std::max(report.tct, part.tct);
      }
    }
    report.sigma = config.sigma;
    report.tick = config.tick;
    report.bucket = config.bucket;
  }
  report.scheduler = std::string(ToString(config.scheduler));
  report.seed = trace.seed;
  return report;
}

Comparison CompareSchedulers(const Trace &trace, const ClusterSpec &cluster,
                             const SimulationConfig &config,
                             const std::vector<SimScheduler> &schedulers) {
  Comparison c;
  for (SimScheduler s : schedulers) {
    SimulationConfig cfg = config;
    cfg.scheduler = s;
    c.reports.push_back(Simulate(trace, cluster, cfg));
    const SimulationReport &r = c.reports.back();
    ComparisonRow row;
    row.scheduler = r.scheduler;
    row.tct = r.tct;
    row.gamma = r.gamma;
    row.mean_high = MeanIteration(r, Priority::kHigh);
    row.mean_low = MeanIteration(r, Priority::kLow);
    for (const auto &j : r.jobs) {
      row.accepted += j.accepted ? 1 : 0;
      row.accepted_on_arrival += j.accepted_on_arrival ? 1 : 0;
    }
    row.pauses = r.pause_count;
    c.rows.push_back(row);
  }
  if (!c.rows.empty() && c.rows.front().tct > 0.0) {
    for (auto &row : c.rows) row.tct_delta = (row.tct - c.rows.front().tct) / c.rows.front().tct;
  }
  return c;
}

double MeanIteration(const SimulationReport &report, Priority priority) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto &j : report.jobs) {
    if (j.priority != priority) continue;
    sum += std::accumulate(j.iterations.begin(), j.iterations.end(), 0.0);
    n += j.iterations.size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace metronome
