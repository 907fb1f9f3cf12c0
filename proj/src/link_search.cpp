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

#include "metronome/link_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace metronome {

namespace {

constexpr double kOffsetTol = 1e-7;  // in grid steps

// Relative slack on the capacity so summed doubles that land on B exactly
// do not register as overload.
constexpr double kCapacitySlack = 1e-12;

}  // namespace

LinkSearch::LinkSearch(std::span<const TaskSpec> sharing, double capacity,
                       int di_pre, const PeriodParams &params,
                       const std::string &fastest_job)
    : tasks_(sharing.begin(), sharing.end()), capacity_(capacity), di_pre_(di_pre) {
  if (di_pre <= 0) throw Error(ErrorKind::kInvalidArgument, "di_pre must be positive");
  if (!(capacity > 0.0)) throw Error(ErrorKind::kInvalidArgument, "capacity must be positive");
  if (tasks_.empty()) throw Error(ErrorKind::kEmptySet, "empty sharing set");
  unified_ = UnifyPeriodsOrFallback(tasks_, params);
  const TaskSpec &ref = HighestPriorityTask(tasks_);
  reference_task_ = ref.id;

  std::vector<std::int64_t> first_order;
  for (const auto &t : tasks_) {
    auto it = std::find_if(groups_.begin(), groups_.end(),
                           [&](const LinkGroup &g) { return g.job_id == t.job_id; });
    const CircleAbstraction c = Abstract(t, unified_);
    if (it == groups_.end()) {
      LinkGroup g;
      g.job_id = t.job_id;
      g.mul = c.mul;
      g.alpha = c.alpha;
      groups_.push_back(g);
      first_order.push_back(t.submit_order);
      it = groups_.end() - 1;
    }
    it->task_ids.push_back(t.id);
    it->bandwidth += t.bandwidth;
    first_order[static_cast<std::size_t>(it - groups_.begin())] =
        std::min(first_order[static_cast<std::size_t>(it - groups_.begin())], t.submit_order);
  }
  // Reference first, fastest job last, the rest by submission.
  std::vector<std::size_t> order(groups_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rank = [&](std::size_t i) {
    if (groups_[i].job_id == ref.job_id) return 0;
    if (!fastest_job.empty() && groups_[i].job_id == fastest_job) return 2;
    return 1;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    return first_order[a] < first_order[b];
  });
  std::vector<LinkGroup> sorted;
  for (std::size_t i : order) sorted.push_back(groups_[i]);
  groups_ = std::move(sorted);

  const double steps_per_radian = di_pre_ / kTwoPi;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto &grp = groups_[g];
    const bool rotatable = g != 0 && grp.alpha > 0.0;
    grp.radix = rotatable
                    ? static_cast<int>(std::ceil(static_cast<double>(di_pre_) / grp.mul - 1e-9))
                    : 1;
  }

  // Fractional endpoint offsets within one grid step.
  std::vector<double> offsets{0.0};
  auto frac = [](double x) {
    double f = x - std::floor(x);
    return f > 1.0 - kOffsetTol ? 0.0 : f;
  };
  for (const auto &grp : groups_) {
    const double a = grp.alpha * steps_per_radian;
    for (int k = 0; k < grp.mul; ++k) {
      const double u = static_cast<double>(di_pre_) * k / grp.mul;
      offsets.push_back(frac(u));
      offsets.push_back(frac(u + a));
    }
  }
  std::sort(offsets.begin(), offsets.end());
  std::vector<double> uniq;
  for (double f : offsets) {
    if (uniq.empty() || f - uniq.back() > kOffsetTol) uniq.push_back(f);
  }
  cells_per_step_ = static_cast<Eigen::Index>(uniq.size());
  const Eigen::Index cells = cells_per_step_ * di_pre_;
  widths_.resize(cells);
  for (Eigen::Index j = 0; j < di_pre_; ++j) {
    for (Eigen::Index s = 0; s < cells_per_step_; ++s) {
      const double end = s + 1 < cells_per_step_ ? uniq[static_cast<std::size_t>(s + 1)] : 1.0;
      widths_(j * cells_per_step_ + s) = (end - uniq[static_cast<std::size_t>(s)]) / steps_per_radian;
    }
  }
  auto cell_of = [&](double x) -> Eigen::Index {
    double j = std::floor(x);
    double f = x - j;
    if (f > 1.0 - kOffsetTol) {
      j += 1.0;
      f = 0.0;
    }
    auto it = std::lower_bound(uniq.begin(), uniq.end(), f - kOffsetTol);
    const auto s = static_cast<Eigen::Index>(it - uniq.begin());
    const auto step = static_cast<Eigen::Index>(j) % di_pre_;
    return (step * cells_per_step_ + s) % cells;
  };
  for (const auto &grp : groups_) {
    Eigen::ArrayXd cov = Eigen::ArrayXd::Zero(cells);
    const double a = grp.alpha * steps_per_radian;
    for (int k = 0; k < grp.mul; ++k) {
      if (a <= kOffsetTol) break;
      if (a >= di_pre_ - kOffsetTol) {
        cov.setConstant(1.0);
        break;
      }
      const double u = static_cast<double>(di_pre_) * k / grp.mul;
      const Eigen::Index first = cell_of(u);
      Eigen::Index count = (cell_of(u + a) - first + cells) % cells;
      for (Eigen::Index c = 0; c < count; ++c) cov((first + c) % cells) = 1.0;
    }
    coverage_.push_back(cov * grp.bandwidth);
  }
}

std::uint64_t LinkSearch::combination_count() const {
  std::uint64_t n = 1;
  for (const auto &g : groups_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(g.radix)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= static_cast<std::uint64_t>(g.radix);
  }
  return n;
}

Eigen::ArrayXd LinkSearch::Shifted(std::size_t g, int index) const {
  const Eigen::ArrayXd &cov = coverage_[g];
  const Eigen::Index cells = cov.size();
  const Eigen::Index k = (static_cast<Eigen::Index>(index) * cells_per_step_) % cells;
  if (k == 0) return cov;
  Eigen::ArrayXd out(cells);
  out.segment(k, cells - k) = cov.head(cells - k);
  out.head(k) = cov.tail(k);
  return out;
}

double LinkSearch::ExcessOf(const std::vector<int> &index) const {
  Eigen::ArrayXd demand = Eigen::ArrayXd::Zero(widths_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) demand += Shifted(g, index.at(g));
  const double cap = capacity_ * (1.0 + kCapacitySlack);
  return ((demand - cap).max(0.0) * widths_).sum();
}

double LinkSearch::ScoreFromExcess(double excess) const {
  return std::clamp(100.0 * (1.0 - excess / (kTwoPi * capacity_)), 0.0, 100.0);
}

double LinkSearch::ScoreOf(const std::vector<int> &index) const {
  return ScoreFromExcess(ExcessOf(index));
}

bool LinkSearch::Perfect(double excess) const {
  return excess <= kCapacitySlack * capacity_;
}

double LinkSearch::PsiOf(const std::vector<int> &index) const {
  std::vector<CircleAbstraction> circles;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const auto &id : groups_[g].task_ids) {
      auto t = std::find_if(tasks_.begin(), tasks_.end(),
                            [&](const TaskSpec &x) { return x.id == id; });
      CircleAbstraction c = Abstract(*t, unified_);
      c.rotation = kTwoPi * index.at(g) / di_pre_;
      circles.push_back(std::move(c));
    }
  }
  return MinCommInterval(circles, capacity_).value_or(std::numbers::pi);
}

void LinkSearch::Enumerate(const Visitor &visit,
                           const std::vector<std::optional<int>> &fixed) const {
  const std::size_t n = groups_.size();
  auto lo = [&](std::size_t g) {
    return g < fixed.size() && fixed[g] ? *fixed[g] : 0;
  };
  auto hi = [&](std::size_t g) {
    return g < fixed.size() && fixed[g] ? *fixed[g] + 1 : groups_[g].radix;
  };
  const double cap = capacity_ * (1.0 + kCapacitySlack);
  std::vector<Eigen::ArrayXd> partial(n + 1, Eigen::ArrayXd::Zero(widths_.size()));
  std::vector<int> index(n, 0);
  std::uint64_t position = 0;
  bool stop = false;
  std::function<void(std::size_t)> rec = [&](std::size_t g) {
    for (int i = lo(g); i < hi(g) && !stop; ++i) {
      index[g] = i;
      partial[g + 1] = partial[g] + Shifted(g, i);
      if (g + 1 == n) {
        const double excess = ((partial[n] - cap).max(0.0) * widths_).sum();
        if (!visit(position++, index, excess)) stop = true;
      } else {
        rec(g + 1);
      }
    }
  };
  rec(0);
}

std::vector<int> LinkSearch::Decode(std::uint64_t position,
                                    const std::vector<std::optional<int>> &fixed) const {
  std::vector<int> index(groups_.size(), 0);
  for (std::size_t g = groups_.size(); g-- > 0;) {
    if (g < fixed.size() && fixed[g]) {
      index[g] = *fixed[g];
      continue;
    }
    const auto radix = static_cast<std::uint64_t>(groups_[g].radix);
    index[g] = static_cast<int>(position % radix);
    position /= radix;
  }
  return index;
}

std::vector<int> LinkSearch::FromScheme(const RotationScheme &scheme) const {
  std::vector<int> index(groups_.size(), 0);
  for (std::size_t g = 1; g < groups_.size(); ++g) {
    for (const auto &id : groups_[g].task_ids) {
      auto it = scheme.index.find(id);
      if (it != scheme.index.end()) {
        index[g] = it->second % groups_[g].radix;
        break;
      }
    }
  }
  return index;
}

RotationScheme LinkSearch::ToScheme(std::size_t node, const std::vector<int> &index) const {
  RotationScheme s;
  s.node = node;
  s.di_pre = di_pre_;
  s.t_l = unified_.t_l;
  s.reference = reference_task_;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const auto &id : groups_[g].task_ids) s.index[id] = index.at(g);
  }
  s.DeriveShifts();
  return s;
}

namespace {

std::vector<std::optional<int>> CapFixed(const LinkSearch &search,
                                         const std::vector<int> &current,
                                         std::uint64_t max_enumeration,
                                         bool &truncated) {
  std::vector<std::optional<int>> fixed;
  truncated = search.combination_count() > max_enumeration;
  if (!truncated) return fixed;
  const std::size_t n = search.groups().size();
  fixed.resize(n);
  for (std::size_t g = 0; g + 1 < n; ++g) {
    fixed[g] = g < current.size() ? current[g] % search.groups()[g].radix : 0;
  }
  return fixed;
}

// Tracks the best non-perfect combination: lowest excess, then highest Ψ.
struct Fallback {
  bool any = false;
  double excess = 0.0;
  double psi = 0.0;
  std::vector<int> index;
  bool use_psi = false;

  void Offer(const LinkSearch &search, const std::vector<int> &idx, double e) {
    const double tol = 1e-12 * search.capacity();
    if (any && e > excess + tol) return;
    if (any && e >= excess - tol && !use_psi) return;
    const double p = use_psi ? search.PsiOf(idx) : 0.0;
    if (any && e >= excess - tol && p <= psi + 1e-12) return;
    any = true;
    excess = e;
    psi = p;
    index = idx;
  }
};

SearchResult Finish(const LinkSearch &search, std::vector<int> index, bool perfect,
                    bool truncated) {
  SearchResult r;
  r.score = perfect ? 100.0 : search.ScoreOf(index);
  r.psi = search.PsiOf(index);
  r.perfect = perfect;
  r.truncated = truncated;
  r.index = std::move(index);
  return r;
}

}  // namespace

SearchResult FirstRunMiddle(const LinkSearch &search,
                            const std::vector<int> &current,
                            std::uint64_t max_enumeration) {
  bool truncated = false;
  const auto fixed = CapFixed(search, current, max_enumeration, truncated);
  bool in_run = false;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  Fallback best;
  search.Enumerate(
      [&](std::uint64_t pos, const std::vector<int> &idx, double excess) {
        if (search.Perfect(excess)) {
          if (!in_run) start = pos;
          in_run = true;
          end = pos;
          return true;
        }
        if (in_run) return false;
        best.Offer(search, idx, excess);
        return true;
      },
      fixed);
  if (!in_run) return Finish(search, best.index, false, truncated);
  const std::uint64_t len = end - start + 1;
  std::vector<int> mid = search.Decode(start + len / 2, fixed);
  if (len % 2 == 0) {
    // Two middles: keep the wider cushion, the earlier one on ties.
    std::vector<int> lower = search.Decode(start + len / 2 - 1, fixed);
    if (search.PsiOf(lower) >= search.PsiOf(mid) - 1e-12) mid = lower;
  }
  return Finish(search, mid, true, truncated);
}

SearchResult OptimalRotation(const LinkSearch &search, RecalcSearch mode,
                             const std::vector<int> &current,
                             std::uint64_t max_enumeration) {
  bool truncated = false;
  const auto fixed = CapFixed(search, current, max_enumeration, truncated);
  Fallback best;
  best.use_psi = true;
  bool found = false;
  double best_psi = 0.0;
  std::vector<int> best_index;
  auto offer_perfect = [&](const std::vector<int> &idx) {
    const double psi = search.PsiOf(idx);
    if (!found || psi > best_psi + 1e-12) {
      found = true;
      best_psi = psi;
      best_index = idx;
    }
  };
  bool in_run = false;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  auto close_run = [&]() {
    const std::uint64_t len = end - start + 1;
    if (len % 2 == 0) offer_perfect(search.Decode(start + len / 2 - 1, fixed));
    offer_perfect(search.Decode(start + len / 2, fixed));
    in_run = false;
  };
  search.Enumerate(
      [&](std::uint64_t pos, const std::vector<int> &idx, double excess) {
        const bool perfect = search.Perfect(excess);
        switch (mode) {
          case RecalcSearch::kExhaustive:
            if (perfect) offer_perfect(idx);
            break;
          case RecalcSearch::kCompact:
            if (perfect) {
              offer_perfect(idx);
              return false;
            }
            break;
          case RecalcSearch::kRunMiddles:
            if (perfect) {
              if (!in_run) start = pos;
              in_run = true;
              end = pos;
            } else if (in_run) {
              close_run();
            }
            break;
        }
        if (!perfect && !found) best.Offer(search, idx, excess);
        return true;
      },
      fixed);
  if (in_run) close_run();
  if (found) return Finish(search, best_index, true, truncated);
  return Finish(search, best.index, false, truncated);
}

}  // namespace metronome
