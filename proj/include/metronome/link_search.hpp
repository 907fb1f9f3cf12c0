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

// Exact rotation search on one host link.
//
// All arc endpoints sit at fixed fractional offsets of the Di-Pre grid, and a
// rotation moves them by whole grid steps. Splitting every grid range at those
// offsets gives a cell grid on which each job's coverage is a 0/1 array and a
// rotation is a cyclic shift, so the clipped demand integral is exact.

#pragma once

#include "metronome/geometry.hpp"
#include "metronome/metrics.hpp"
#include "metronome/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metronome {

/// Tasks of one job on the link; they always share a rotation.
struct LinkGroup {
  std::string job_id;
  std::vector<std::string> task_ids;
  int mul = 1;
  double alpha = 0.0;
  double bandwidth = 0.0;  // summed over the group's tasks
  int radix = 1;           // number of admissible rotation indices
};

class LinkSearch {
 public:
  /// `fastest_job` is enumerated last (fastest-varying); the group holding
  /// the link's highest-priority task is the fixed reference.
  LinkSearch(std::span<const TaskSpec> sharing, double capacity, int di_pre,
             const PeriodParams &params, const std::string &fastest_job = {});

  const std::vector<LinkGroup> &groups() const { return groups_; }
  const UnifiedPeriod &unified() const { return unified_; }
  const std::string &reference_task() const { return reference_task_; }
  double capacity() const { return capacity_; }
  int di_pre() const { return di_pre_; }
  Eigen::Index cell_count() const { return widths_.size(); }

  /// Size of the full combination space.
  std::uint64_t combination_count() const;

  /// ∫ max(0, S − B) over the circle for the given per-group indices.
  double ExcessOf(const std::vector<int> &index) const;
  /// 100 · (1 − excess / (2π B)), clamped.
  double ScoreOf(const std::vector<int> &index) const;
  double ScoreFromExcess(double excess) const;
  bool Perfect(double excess) const;
  /// Ψ of the combination; π when no pair contends.
  double PsiOf(const std::vector<int> &index) const;

  /// Lexicographic traversal, last group fastest. Groups with a value in
  /// `fixed` keep it. The visitor returns false to stop.
  using Visitor = std::function<bool(std::uint64_t position,
                                     const std::vector<int> &index,
                                     double excess)>;
  void Enumerate(const Visitor &visit,
                 const std::vector<std::optional<int>> &fixed = {}) const;

  /// Decodes a traversal position back into per-group indices.
  std::vector<int> Decode(std::uint64_t position,
                          const std::vector<std::optional<int>> &fixed = {}) const;

  /// Per-group indices from a per-task scheme (missing tasks map to 0).
  std::vector<int> FromScheme(const RotationScheme &scheme) const;
  RotationScheme ToScheme(std::size_t node, const std::vector<int> &index) const;

 private:
  Eigen::ArrayXd Shifted(std::size_t g, int index) const;

  std::vector<TaskSpec> tasks_;
  std::vector<LinkGroup> groups_;
  UnifiedPeriod unified_;
  std::string reference_task_;
  double capacity_ = 0.0;
  int di_pre_ = 72;
  Eigen::Index cells_per_step_ = 1;
  Eigen::ArrayXd widths_;                 // radians per cell
  std::vector<Eigen::ArrayXd> coverage_;  // per group, rotation 0, bits/s
};

enum class RecalcSearch {
  kExhaustive,  // every perfect combination, max Ψ
  kRunMiddles,  // middles of the maximal perfect runs only
  kCompact,     // first perfect combination (stage three disabled)
};

struct SearchResult {
  std::vector<int> index;
  double score = 0.0;
  double psi = 0.0;
  bool perfect = false;
  bool truncated = false;  // enumeration cap forced groups to stay fixed
};

/// Scheduler search: middle of the first perfect run, else the best score.
/// When the full space exceeds `max_enumeration`, groups other than the last
/// one are held at `current`.
SearchResult FirstRunMiddle(const LinkSearch &search,
                            const std::vector<int> &current,
                            std::uint64_t max_enumeration);

/// Offline search for the rotation maximizing Ψ among perfect combinations
/// (best score, then Ψ, when none is perfect). Ties resolve to the earliest
/// combination in traversal order.
SearchResult OptimalRotation(const LinkSearch &search, RecalcSearch mode,
                             const std::vector<int> &current,
                             std::uint64_t max_enumeration);

}  // namespace metronome
