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

// Objectives: average bandwidth utilization Γ, dependency latency Λ and the
// minimum communication interval Ψ, plus per-link utilization ξ.

#pragma once

#include "metronome/geometry.hpp"
#include "metronome/model.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metronome {

/// Compared as (gamma desc, lambda asc, psi desc).
struct ObjectiveVector {
  double gamma = 0.0;
  double lambda = 0.0;
  double psi = 0.0;
};

/// > 0 when a is lexicographically better than b, < 0 when worse.
int CompareObjectives(const ObjectiveVector &a, const ObjectiveVector &b,
                      double tol = 1e-9);

/// ξ = (1/2π) ∫ min(S, B) / B.
double LinkUtilization(const AngularProfile &profile, double capacity);

/// Γ = (Σ_l B_l ξ_l / B^max) / |L|.
double AvgBandwidthUtilization(std::span<const double> xi,
                               std::span<const double> capacity, double b_max);

/// Λ_w, evaluated literally (self pairs on the diagonal included). Throws
/// kUnplacedTask if any task of the workload is not placed.
double WorkloadLatency(const Placement &placement, const WorkloadSpec &workload,
                       const Eigen::MatrixXd &latency);

/// Σ Λ_w over the deployed workloads.
double TotalLatency(const Placement &placement,
                    std::span<const WorkloadSpec> workloads,
                    const Eigen::MatrixXd &latency);

/// Two tasks contend when they belong to different jobs and their combined
/// rate reaches the link capacity.
bool Contending(const CircleAbstraction &s, const CircleAbstraction &t,
                double capacity);

/// Ψ over the contending pairs. std::nullopt when no pair contends.
std::optional<double> MinCommInterval(std::span<const CircleAbstraction> circles,
                                      double capacity);

/// Rotation of every task sharing one host link, in Di-Pre index units.
struct RotationScheme {
  std::size_t node = 0;
  int di_pre = 72;
  double t_l = 0.0;
  std::string reference;               // p^h of the link; index 0
  std::map<std::string, int> index;    // task id -> rotation index
  std::map<std::string, double> time_shifts;

  double Angle(const std::string &task_id) const;
  /// shift = index / di_pre * t_l for every indexed task.
  void DeriveShifts();
};

struct LinkEvaluation {
  UnifiedPeriod unified;
  std::vector<CircleAbstraction> circles;
  AngularProfile profile;
  double xi = 0.0;
  std::optional<double> psi;
};

/// Abstracts the sharing set, applies the scheme's rotations (tasks missing
/// from the scheme stay at 0) and evaluates ξ and Ψ exactly.
LinkEvaluation EvaluateLink(std::span<const TaskSpec> sharing, double capacity,
                            const RotationScheme *scheme,
                            const PeriodParams &params);

struct ClusterEvaluation {
  ObjectiveVector objectives;
  std::vector<double> xi;  // per node
  bool contention_free = true;  // no link clips anywhere
};

/// Whole-cluster objectives. Ψ is the minimum over links that have
/// contending pairs, π when none does.
ClusterEvaluation EvaluateCluster(const ClusterSpec &cluster,
                                  const Placement &placement,
                                  std::span<const WorkloadSpec> workloads,
                                  const std::map<std::size_t, RotationScheme> &schemes,
                                  const PeriodParams &params);

}  // namespace metronome
