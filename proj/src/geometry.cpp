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

#include "metronome/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace metronome {

namespace {

constexpr double kTimeEps = 1e-12;

// One entry per job: tasks of a job share their period.
struct PeriodGroup {
  std::string job_id;
  double period = 0.0;
  std::vector<std::string> task_ids;
};

struct Candidate {
  double t_l = 0.0;
  std::vector<int> mul;
  std::vector<double> idle;
  double total_idle = 0.0;
};

std::vector<PeriodGroup> GroupByJob(std::span<const TaskSpec> tasks,
                                    std::size_t &reference) {
  if (tasks.empty()) throw Error(ErrorKind::kEmptySet, "no tasks to unify");
  const TaskSpec &ref = HighestPriorityTask(tasks);
  std::vector<PeriodGroup> groups;
  for (const auto &t : tasks) {
    if (!(t.period > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "task '" + t.id + "' has no declared period");
    }
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const PeriodGroup &g) { return g.job_id == t.job_id; });
    if (it == groups.end()) {
      groups.push_back({t.job_id, t.period, {t.id}});
    } else {
      it->task_ids.push_back(t.id);
    }
  }
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].job_id == ref.job_id) reference = i;
  }
  return groups;
}

UnifiedPeriod Expand(const std::vector<PeriodGroup> &groups, const Candidate &c,
                     bool approximate) {
  UnifiedPeriod out;
  out.t_l = c.t_l;
  out.approximate = approximate;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    TaskPeriod tp{c.mul[g], c.idle[g], c.t_l / c.mul[g]};
    for (const auto &id : groups[g].task_ids) out.tasks.emplace(id, tp);
  }
  return out;
}

std::optional<Candidate> Evaluate(const std::vector<PeriodGroup> &groups,
                                  std::size_t reference,
                                  const std::vector<int> &mul,
                                  const PeriodParams &params) {
  const std::size_t n = groups.size();
  std::vector<double> product(n);
  for (std::size_t g = 0; g < n; ++g) product[g] = mul[g] * groups[g].period;
  const auto [lo, hi] = std::minmax_element(product.begin(), product.end());

  Candidate c;
  c.mul = mul;
  c.idle.assign(n, 0.0);
  if (*hi - *lo <= params.g_t + kTimeEps) {
    // Close enough everywhere: average the multiples.
    c.t_l = std::accumulate(product.begin(), product.end(), 0.0) / n;
    return c;
  }
  c.t_l = product[reference];
  for (std::size_t g = 0; g < n; ++g) {
    if (g == reference) continue;
    const double gap = c.t_l - product[g];
    if (std::abs(gap) <= params.g_t + kTimeEps) continue;
    const double per_iteration = gap / mul[g];
    if (gap > 0.0 &&
        per_iteration <= params.e_t * groups[g].period + kTimeEps) {
      c.idle[g] = per_iteration;
      c.total_idle += gap;
      continue;
    }
    return std::nullopt;
  }
  return c;
}

std::int64_t ToMicros(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

}  // namespace

double WrapAngle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

const TaskPeriod &UnifiedPeriod::at(const std::string &task_id) const {
  auto it = tasks.find(task_id);
  if (it == tasks.end()) {
    throw Error(ErrorKind::kInvalidArgument,
                "task '" + task_id + "' is not part of the unified period");
  }
  return it->second;
}

UnifiedPeriod UnifyPeriods(std::span<const TaskSpec> tasks,
                           const PeriodParams &params) {
  if (!(params.g_t > 0.0) || !(params.e_t > 0.0 && params.e_t < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "need g_t > 0 and 0 < e_t < 1");
  }
  std::size_t reference = 0;
  const auto groups = GroupByJob(tasks, reference);
  const std::size_t n = groups.size();
  double t_max = 0.0;
  for (const auto &g : groups) t_max = std::max(t_max, g.period);
  const double bound = params.max_lcm_factor * t_max + kTimeEps;
  const double t_ref = groups[reference].period;

  std::optional<Candidate> best;
  for (int k = 1; k * t_ref <= bound; ++k) {
    const double anchor = k * t_ref;
    if (best && anchor - params.g_t > best->t_l) break;
    // Floor/ceil multiplicities around the anchor for each non-reference job.
    std::vector<std::vector<int>> options(n);
    for (std::size_t g = 0; g < n; ++g) {
      if (g == reference) {
        options[g] = {k};
        continue;
      }
      const double q = anchor / groups[g].period;
      const int fl = static_cast<int>(std::floor(q + 1e-9));
      const int ce = static_cast<int>(std::ceil(q - 1e-9));
      if (fl >= 1) options[g].push_back(fl);
      if (ce >= 1 && ce != fl) options[g].push_back(ce);
    }
    if (std::any_of(options.begin(), options.end(),
                    [](const auto &o) { return o.empty(); })) {
      continue;
    }
    std::vector<std::size_t> pick(n, 0);
    while (true) {
      std::vector<int> mul(n);
      for (std::size_t g = 0; g < n; ++g) mul[g] = options[g][pick[g]];
      if (auto c = Evaluate(groups, reference, mul, params)) {
        bool products_in_bound = true;
        for (std::size_t g = 0; g < n; ++g) {
          products_in_bound &= mul[g] * groups[g].period <= bound;
        }
        const bool better =
            !best || c->t_l < best->t_l - kTimeEps ||
            (std::abs(c->t_l - best->t_l) <= kTimeEps &&
             c->total_idle < best->total_idle - kTimeEps);
        if (products_in_bound && better) best = std::move(c);
      }
      std::size_t g = n;
      while (g > 0) {
        --g;
        if (++pick[g] < options[g].size()) break;
        pick[g] = 0;
        if (g == 0) {
          g = n + 1;
          break;
        }
      }
      if (g == n + 1 || n == 0) break;
    }
  }
  if (!best) {
    throw Error(ErrorKind::kIncompatible,
                "periods cannot be unified within the G_T/E_T thresholds");
  }
  return Expand(groups, *best, false);
}

UnifiedPeriod UnifyPeriodsOrFallback(std::span<const TaskSpec> tasks,
                                     const PeriodParams &params) {
  try {
    return UnifyPeriods(tasks, params);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kIncompatible) throw;
  }
  std::size_t reference = 0;
  const auto groups = GroupByJob(tasks, reference);
  const std::size_t n = groups.size();
  double t_max = 0.0;
  for (const auto &g : groups) t_max = std::max(t_max, g.period);
  const double bound = params.max_lcm_factor * t_max;

  // Exact LCM on a microsecond grid when it stays within the bound.
  std::int64_t lcm = 1;
  bool overflow = false;
  for (const auto &g : groups) {
    const std::int64_t p = std::max<std::int64_t>(1, ToMicros(g.period));
    const std::int64_t gcd = std::gcd(lcm, p);
    if (lcm / gcd > std::numeric_limits<std::int64_t>::max() / p) {
      overflow = true;
      break;
    }
    lcm = lcm / gcd * p;
  }
  Candidate c;
  c.idle.assign(n, 0.0);
  if (!overflow && lcm * 1e-6 <= bound + kTimeEps) {
    c.t_l = lcm * 1e-6;
    for (const auto &g : groups) {
      c.mul.push_back(static_cast<int>(lcm / std::max<std::int64_t>(1, ToMicros(g.period))));
    }
    return Expand(groups, c, true);
  }
  // Nearest multiples of the reference period, minimizing the worst mismatch.
  const double t_ref = groups[reference].period;
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 1; k * t_ref <= bound + kTimeEps; ++k) {
    const double t = k * t_ref;
    std::vector<int> mul(n);
    double err = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
      mul[g] = std::max(1, static_cast<int>(std::lround(t / groups[g].period)));
      err = std::max(err, std::abs(mul[g] * groups[g].period - t) / t);
    }
    if (err < best_err - 1e-15) {
      best_err = err;
      c.t_l = t;
      c.mul = mul;
    }
  }
  return Expand(groups, c, true);
}

bool AngularInterval::Contains(double theta) const {
  if (length <= 0.0) return false;
  if (length >= kTwoPi) return true;
  return WrapAngle(theta - start) < length;
}

std::vector<AngularInterval> CircleAbstraction::CommIntervals() const {
  std::vector<AngularInterval> out;
  out.reserve(static_cast<std::size_t>(mul));
  for (int i = 0; i < mul; ++i) {
    out.push_back({WrapAngle(kTwoPi * i / mul + rotation), alpha});
  }
  return out;
}

bool CircleAbstraction::Communicating(double theta) const {
  for (int i = 0; i < mul; ++i) {
    const AngularInterval arc{WrapAngle(kTwoPi * i / mul + rotation), alpha};
    if (arc.Contains(theta)) return true;
  }
  return false;
}

CircleAbstraction Abstract(const TaskSpec &task, const UnifiedPeriod &unified) {
  const TaskPeriod &tp = unified.at(task.id);
  CircleAbstraction c;
  c.task_id = task.id;
  c.job_id = task.job_id;
  c.mul = tp.mul;
  const double duty = std::clamp(task.comm_duration() / tp.effective_period, 0.0, 1.0);
  c.alpha = kTwoPi / tp.mul * duty;
  c.rotation = 0.0;
  c.bandwidth = task.bandwidth;
  return c;
}

double AngularProfile::width(std::size_t k) const {
  const double end = k + 1 < breakpoints.size() ? breakpoints[k + 1] : kTwoPi;
  return end - breakpoints[k];
}

double AngularProfile::ValueAt(double theta) const {
  theta = WrapAngle(theta);
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), theta);
  const auto k = static_cast<std::size_t>(std::distance(breakpoints.begin(), it)) - 1;
  return values[k];
}

double AngularProfile::Integral() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) sum += values[k] * width(k);
  return sum;
}

AngularProfile DemandProfile(std::span<const CircleAbstraction> circles) {
  std::vector<double> cuts{0.0};
  for (const auto &c : circles) {
    if (c.alpha <= 0.0) continue;
    for (const auto &arc : c.CommIntervals()) {
      cuts.push_back(arc.start);
      cuts.push_back(WrapAngle(arc.start + arc.length));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  AngularProfile p;
  for (double x : cuts) {
    if (p.breakpoints.empty() || x - p.breakpoints.back() > 1e-12) {
      p.breakpoints.push_back(x);
    }
  }
  if (kTwoPi - p.breakpoints.back() <= 1e-12 && p.breakpoints.size() > 1) {
    p.breakpoints.pop_back();
  }
  p.values.resize(p.breakpoints.size(), 0.0);
  for (std::size_t k = 0; k < p.breakpoints.size(); ++k) {
    const double mid = p.breakpoints[k] + 0.5 * p.width(k);
    for (const auto &c : circles) {
      if (c.Communicating(mid)) p.values[k] += c.bandwidth;
    }
  }
  return p;
}

double IntervalDistance(const AngularInterval &a, const AngularInterval &b) {
  const double d = std::abs(a.midpoint() - b.midpoint());
  return std::min(d, kTwoPi - d);
}

}  // namespace metronome
