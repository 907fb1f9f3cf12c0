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

#include "metronome/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace metronome {

int CompareObjectives(const ObjectiveVector &a, const ObjectiveVector &b,
                      double tol) {
  if (std::abs(a.gamma - b.gamma) > tol) return a.gamma > b.gamma ? 1 : -1;
  if (std::abs(a.lambda - b.lambda) > tol) return a.lambda < b.lambda ? 1 : -1;
  if (std::abs(a.psi - b.psi) > tol) return a.psi > b.psi ? 1 : -1;
  return 0;
}

double LinkUtilization(const AngularProfile &profile, double capacity) {
  if (!(capacity > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "link capacity must be positive");
  }
  double used = 0.0;
  for (std::size_t k = 0; k < profile.values.size(); ++k) {
    used += std::min(profile.values[k], capacity) * profile.width(k);
  }
  return used / (kTwoPi * capacity);
}

double AvgBandwidthUtilization(std::span<const double> xi,
                               std::span<const double> capacity, double b_max) {
  if (xi.empty() || xi.size() != capacity.size()) {
    throw Error(ErrorKind::kInvalidArgument, "need one capacity per link");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < xi.size(); ++l) sum += capacity[l] * xi[l] / b_max;
  return sum / static_cast<double>(xi.size());
}

double WorkloadLatency(const Placement &placement, const WorkloadSpec &workload,
                       const Eigen::MatrixXd &latency) {
  for (const auto &j : workload.jobs) {
    for (const auto &t : j.tasks) {
      if (!placement.NodeOf(t.id)) {
        throw Error(ErrorKind::kUnplacedTask, "task '" + t.id + "' is not placed");
      }
    }
  }
  double total = 0.0;
  for (const auto &[a, b] : workload.dependencies) {
    const Eigen::VectorXd pa = placement.TaskCounts(a);
    const Eigen::VectorXd pb = placement.TaskCounts(b);
    total += pa.dot(latency * pb);
  }
  for (const auto &j : workload.jobs) {
    const Eigen::VectorXd p = placement.TaskCounts(j.id);
    // Ordered pairs x <= y only.
    const Eigen::MatrixXd upper = latency.triangularView<Eigen::Upper>();
    total += p.dot(upper * p);
  }
  return total;
}

double TotalLatency(const Placement &placement,
                    std::span<const WorkloadSpec> workloads,
                    const Eigen::MatrixXd &latency) {
  double total = 0.0;
  for (const auto &w : workloads) {
    if (placement.WorkloadDeployed(w.id)) {
      total += WorkloadLatency(placement, w, latency);
    }
  }
  return total;
}

bool Contending(const CircleAbstraction &s, const CircleAbstraction &t,
                double capacity) {
  if (s.job_id == t.job_id) return false;
  if (s.alpha <= 0.0 || t.alpha <= 0.0) return false;
  return s.bandwidth + t.bandwidth >= capacity * (1.0 - 1e-12);
}

std::optional<double> MinCommInterval(std::span<const CircleAbstraction> circles,
                                      double capacity) {
  std::optional<double> psi;
  for (std::size_t a = 0; a < circles.size(); ++a) {
    for (std::size_t b = a + 1; b < circles.size(); ++b) {
      if (!Contending(circles[a], circles[b], capacity)) continue;
      for (const auto &x : circles[a].CommIntervals()) {
        for (const auto &y : circles[b].CommIntervals()) {
          const double d = IntervalDistance(x, y);
          psi = psi ? std::min(*psi, d) : d;
        }
      }
    }
  }
  return psi;
}

double RotationScheme::Angle(const std::string &task_id) const {
  auto it = index.find(task_id);
  return it == index.end() ? 0.0 : kTwoPi * it->second / di_pre;
}

void RotationScheme::DeriveShifts() {
  time_shifts.clear();
  for (const auto &[id, i] : index) {
    time_shifts[id] = static_cast<double>(i) / di_pre * t_l;
  }
}

LinkEvaluation EvaluateLink(std::span<const TaskSpec> sharing, double capacity,
                            const RotationScheme *scheme,
                            const PeriodParams &params) {
  LinkEvaluation ev;
  if (sharing.empty()) {
    ev.profile = DemandProfile({});
    return ev;
  }
  ev.unified = UnifyPeriodsOrFallback(sharing, params);
  for (const auto &t : sharing) {
    CircleAbstraction c = Abstract(t, ev.unified);
    if (scheme) c.rotation = scheme->Angle(t.id);
    ev.circles.push_back(std::move(c));
  }
  ev.profile = DemandProfile(ev.circles);
  ev.xi = LinkUtilization(ev.profile, capacity);
  ev.psi = MinCommInterval(ev.circles, capacity);
  return ev;
}

ClusterEvaluation EvaluateCluster(const ClusterSpec &cluster,
                                  const Placement &placement,
                                  std::span<const WorkloadSpec> workloads,
                                  const std::map<std::size_t, RotationScheme> &schemes,
                                  const PeriodParams &params) {
  ClusterEvaluation out;
  std::vector<double> capacity;
  std::optional<double> psi;
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    const double b = cluster.nodes[n].link_bandwidth;
    capacity.push_back(b);
    const auto sharing = placement.SharingSet(n);
    auto it = schemes.find(n);
    const LinkEvaluation ev =
        EvaluateLink(sharing, b, it == schemes.end() ? nullptr : &it->second, params);
    out.xi.push_back(ev.xi);
    for (double v : ev.profile.values) {
      if (v > b * (1.0 + 1e-12)) out.contention_free = false;
    }
    if (ev.psi) psi = psi ? std::min(*psi, *ev.psi) : *ev.psi;
  }
  out.objectives.gamma = AvgBandwidthUtilization(out.xi, capacity, cluster.b_max);
  out.objectives.lambda = TotalLatency(placement, workloads, cluster.latency);
  out.objectives.psi = psi.value_or(std::numbers::pi);
  return out;
}

}  // namespace metronome
