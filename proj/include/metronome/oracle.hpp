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

// Brute-force reference for the three-stage objective on small instances.
// Rotations are evaluated with the exact piecewise profile, independently of
// the scheduler's cell-grid search.

#pragma once

#include "metronome/geometry.hpp"
#include "metronome/metrics.hpp"
#include "metronome/model.hpp"

#include <map>
#include <vector>

namespace metronome {

struct OracleLimits {
  std::size_t max_nodes = 4;
  std::size_t max_jobs = 4;
  std::size_t max_tasks_per_job = 3;
  int max_di_pre = 72;
};

struct OracleResult {
  Placement placement;
  std::map<std::size_t, RotationScheme> schemes;  // contended links only
  ObjectiveVector objectives;
  std::vector<double> xi;
  std::size_t placements_evaluated = 0;
};

/// Lexicographically best (Γ, Λ, Ψ) over every placement satisfying the
/// deployment, resource, bandwidth and acyclicity constraints and every
/// rotation vector. Throws kInstanceTooLarge beyond `limits`.
OracleResult OracleSolve(const ClusterSpec &cluster,
                         const std::vector<WorkloadSpec> &workloads, int di_pre,
                         const PeriodParams &params, const OracleLimits &limits = {});

/// Rotation stages only, for a given placement.
OracleResult OracleSolveRotations(const ClusterSpec &cluster,
                                  const std::vector<WorkloadSpec> &workloads,
                                  const Placement &placement, int di_pre,
                                  const PeriodParams &params);

}  // namespace metronome
