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

#include "metronome/trace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace metronome {

namespace {

constexpr double kGbps = 1e9;

double GpuCount(const ClusterSpec &cluster) {
  double g = 0.0;
  for (const auto &n : cluster.nodes) g += n.capacity.gpu;
  return g;
}

struct Interval {
  double start;
  double end;
  double gpus;
};

double BusyAt(const std::vector<Interval> &jobs, double t) {
  double busy = 0.0;
  for (const auto &j : jobs) {
    if (j.start <= t && t < j.end) busy += j.gpus;
  }
  return busy;
}

// Largest busy count over [t, t + len) once a new job is added.
double PeakOver(const std::vector<Interval> &jobs, double t, double len) {
  double peak = BusyAt(jobs, t);
  for (const auto &j : jobs) {
    if (j.start > t && j.start < t + len) peak = std::max(peak, BusyAt(jobs, j.start));
  }
  return peak;
}

}  // namespace

std::vector<ModelTemplate> DefaultCatalog() {
  using P = Priority;
  return {
      {"ft-vgg11", 0.120, 0.40, 10 * kGbps, 2, P::kHigh, false},
      {"ft-vgg16", 0.160, 0.45, 12 * kGbps, 2, P::kHigh, false},
      {"pre-vgg19", 0.200, 0.50, 15 * kGbps, 3, P::kLow, false},
      {"ft-resnet18", 0.080, 0.25, 5 * kGbps, 1, P::kHigh, false},
      {"pre-resnet50", 0.160, 0.30, 8 * kGbps, 2, P::kLow, false},
      {"ft-resnet152", 0.240, 0.35, 10 * kGbps, 2, P::kHigh, false},
      {"ft-wideresnet101", 0.200, 0.45, 15 * kGbps, 2, P::kHigh, false},
      {"ft-googlenet", 0.100, 0.30, 5 * kGbps, 1, P::kHigh, false},
      {"ft-densenet201", 0.200, 0.25, 8 * kGbps, 2, P::kHigh, false},
      {"ft-alexnet", 0.080, 0.0, 0.0, 1, P::kLow, true},
      {"pre-gpt1", 0.300, 0.40, 12 * kGbps, 3, P::kLow, false},
      {"pre-gpt2", 0.400, 0.55, 20 * kGbps, 4, P::kLow, false},
      {"pre-bert", 0.300, 0.50, 15 * kGbps, 2, P::kLow, false},
  };
}

ClusterSpec DefaultCluster() {
  ClusterSpec c;
  for (int i = 0; i < 3; ++i) {
    c.nodes.push_back({"node-" + std::to_string(i), {32.0, 256e9, 4.0}, 25 * kGbps});
  }
  c.nodes.push_back({"node-3", {16.0, 128e9, 1.0}, 10 * kGbps});
  c.latency = Eigen::MatrixXd::Constant(4, 4, 2.0);
  c.latency.diagonal().setOnes();
  // The small node hangs off a farther switch.
  for (int i = 0; i < 3; ++i) c.latency(i, 3) = c.latency(3, i) = 4.0;
  c.Finalize();
  return c;
}

std::vector<LoadSample> LoadProfile(const Trace &trace, const ClusterSpec &cluster) {
  std::vector<Interval> jobs;
  std::vector<double> edges;
  for (const auto &w : trace.workloads) {
    for (const auto &j : w.jobs) {
      const double len = j.low_comm() ? j.duration
                                      : static_cast<double>(j.iterations) * j.tasks.front().period;
      jobs.push_back({w.arrival, w.arrival + len, static_cast<double>(j.tasks.size())});
      edges.push_back(w.arrival);
      edges.push_back(w.arrival + len);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const double total = GpuCount(cluster);
  std::vector<LoadSample> out;
  for (double t : edges) out.push_back({t, BusyAt(jobs, t) / total});
  return out;
}

Trace GenerateTrace(std::uint64_t seed, const TraceParams &params, const ClusterSpec &cluster) {
  Trace trace;
  trace.seed = seed;
  if (params.load_high == 0.0) return trace;
  if (!(params.horizon > 0.0) || !(params.min_duration > 0.0) ||
      params.max_duration < params.min_duration || !(params.mean_interarrival > 0.0) ||
      params.load_low < 0.0 || params.load_high < params.load_low || params.load_high < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "trace parameters must be positive and ordered");
  }
  if (params.catalog.empty()) throw Error(ErrorKind::kInvalidArgument, "empty model catalog");
  const double total = GpuCount(cluster);
  int smallest = params.catalog.front().tasks;
  for (const auto &m : params.catalog) smallest = std::min(smallest, m.tasks);
  if (params.load_high > 1.0 ||
      smallest > params.load_high * total) {
    throw Error(ErrorKind::kInfeasibleLoad, "load target exceeds the cluster's GPU capacity");
  }

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(1.0 / params.mean_interarrival);
  std::uniform_int_distribution<std::size_t> pick(0, params.catalog.size() - 1);
  std::uniform_real_distribution<double> dur(params.min_duration, params.max_duration);
  std::vector<Interval> active;
  int counter = 0;
  double t = 0.0;
  while (true) {
    // Below the band the arrival process runs four times faster.
    const double busy = BusyAt(active, t);
    const double scale = busy < params.load_low * total ? 0.25 : 1.0;
    t += gap(rng) * scale;
    if (t >= params.horizon) break;
    const ModelTemplate &m = params.catalog[pick(rng)];
    const double len = dur(rng);
    // Thinning: drop arrivals that would push the load above the band.
    if (PeakOver(active, t, len) + m.tasks > params.load_high * total + 1e-9) continue;
    const std::string id = "w" + std::to_string(counter++);
    WorkloadSpec w;
    w.id = id;
    w.arrival = std::round(t * 1e6) / 1e6;
    JobSpec j;
    j.id = id + "-" + m.name;
    j.workload_id = id;
    j.priority = m.priority;
    for (int k = 0; k < m.tasks; ++k) {
      TaskSpec task;
      task.id = j.id + "-" + std::to_string(k);
      task.job_id = j.id;
      task.workload_id = id;
      task.priority = m.priority;
      task.request = {4.0, 16e9, 1.0};
      task.low_comm = m.low_comm;
      if (!m.low_comm) {
        task.period = m.period;
        task.duty_cycle = m.duty_cycle;
        task.bandwidth = m.bandwidth;
      }
      j.tasks.push_back(task);
    }
    if (m.low_comm) {
      j.duration = std::round(len * 1e3) / 1e3;
    } else {
      j.iterations = std::max<std::int64_t>(1, std::llround(len / m.period));
    }
    active.push_back({w.arrival, w.arrival + len, static_cast<double>(m.tasks)});
    w.jobs.push_back(std::move(j));
    trace.workloads.push_back(std::move(w));
  }
  AssignSubmitOrder(trace.workloads);
  return trace;
}

}  // namespace metronome
