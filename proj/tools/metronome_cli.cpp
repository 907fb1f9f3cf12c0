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

// metronome: trace generation, one-shot scheduling, simulation, comparison,
// offline recalculation, report merging and the brute-force oracle.

#include "metronome/config_io.hpp"
#include "metronome/controller.hpp"
#include "metronome/oracle.hpp"
#include "metronome/report_io.hpp"
#include "metronome/scheduler.hpp"
#include "metronome/simulator.hpp"
#include "metronome/trace.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>

namespace {

using namespace metronome;

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitRejected = 3;

struct Manifest {
  std::string cluster;
  std::string workloads;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::string scheduler = "metronome";
  std::string out;
  double g_t = 0.005;
  double e_t = 0.10;
  int di_pre = 72;
  double a_t = 1.10;
  int o_t = 5;
  int window = 10;
};

void AddThresholds(CLI::App *cmd, Manifest &m) {
  cmd->add_option("--g-t", m.g_t, "Period averaging threshold, seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--e-t", m.e_t, "Idle injection bound, fraction of the period")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  cmd->add_option("--di-pre", m.di_pre, "Rotation divisions per circle")->check(CLI::PositiveNumber);
  cmd->add_option("--a-t", m.a_t, "Slow-iteration ratio")->check(CLI::PositiveNumber);
  cmd->add_option("--o-t", m.o_t, "Slow iterations tolerated per window")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--window", m.window, "Monitoring window, iterations")
      ->check(CLI::PositiveNumber);
}

SchedulerParams SchedulingOf(const Manifest &m) {
  SchedulerParams p;
  p.period.g_t = m.g_t;
  p.period.e_t = m.e_t;
  p.di_pre = m.di_pre;
  return p;
}

ClusterSpec ClusterOf(const Manifest &m) {
  return m.cluster.empty() ? DefaultCluster() : LoadCluster(m.cluster);
}

// A trace file, or a workload file turned into a trace.
std::pair<Trace, Json> TraceOf(const Manifest &m) {
  if (m.trace.empty() == m.workloads.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "exactly one of --trace and --workloads is required");
  }
  const Json doc = LoadDocument(m.trace.empty() ? m.workloads : m.trace);
  Trace t = TraceFromJson(doc);
  if (m.seed) t.seed = *m.seed;
  return {t, doc};
}

SimulationConfig ConfigOf(const Manifest &m, const Json &doc, const ClusterSpec &cluster) {
  SimulationConfig c;
  c.scheduling = SchedulingOf(m);
  c.monitor = {m.a_t, m.o_t, m.window};
  ApplySimulationBlock(doc, cluster, c);
  return c;
}

struct SimFlags {
  std::optional<double> sigma;
  std::optional<double> tick;
  std::optional<double> bucket;
  bool no_monitoring = false;
  bool no_stage_three = false;
};

void AddSimFlags(CLI::App *cmd, SimFlags &f) {
  cmd->add_option("--sigma", f.sigma, "Lognormal drift on compute time")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tick", f.tick, "Alignment tolerance, seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--bucket", f.bucket, "Utilization series bucket, seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-monitoring", f.no_monitoring, "Disable continuous regulation");
  cmd->add_flag("--no-stage-three", f.no_stage_three, "Compact rotations instead of max spacing");
}

void ApplySimFlags(const SimFlags &f, SimulationConfig &c) {
  if (f.sigma) c.sigma = *f.sigma;
  if (f.tick) c.tick = *f.tick;
  if (f.bucket) c.bucket = *f.bucket;
  if (f.no_monitoring) c.monitoring = false;
  if (f.no_stage_three) c.stage_three = false;
}

void Emit(const Json &doc, const std::string &out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    WriteText(out, doc.dump(2));
  }
}

int GenTrace(const Manifest &m, const TraceParams &params) {
  const ClusterSpec cluster = ClusterOf(m);
  const Trace t = GenerateTrace(m.seed.value_or(0), params, cluster);
  if (m.out.empty()) {
    std::cout << TraceToJson(t).dump(2) << "\n";
    return 0;
  }
  WriteText(m.out, TraceToJson(t).dump(2));
  double peak = 0.0;
  double area = 0.0;
  const auto profile = LoadProfile(t, cluster);
  for (std::size_t k = 0; k + 1 < profile.size(); ++k) {
    peak = std::max(peak, profile[k].load);
    area += profile[k].load * (profile[k + 1].time - profile[k].time);
  }
  const double span = profile.empty() ? 0.0 : profile.back().time - profile.front().time;
  std::cout << "jobs=" << t.workloads.size() << " seed=" << t.seed
            << " mean_load=" << FormatDouble(span > 0.0 ? area / span : 0.0)
            << " peak_load=" << FormatDouble(peak) << "\n";
  return 0;
}

int Schedule(const Manifest &m) {
  const ClusterSpec cluster = LoadCluster(m.cluster);
  const auto workloads = LoadWorkloads(m.workloads);
  Scheduler s(cluster, SchedulingOf(m), ParsePolicy(m.scheduler));
  std::vector<JobSchedule> all;
  for (const auto &w : workloads) {
    for (auto &j : s.ScheduleWorkload(w)) all.push_back(std::move(j));
  }
  Emit(ScheduleToJson(all, s), m.out);
  for (const auto &j : all) {
    if (!j.accepted) return kExitRejected;
  }
  return 0;
}

int Recalc(const Manifest &m, const std::string &mode_name) {
  RecalcSearch mode = RecalcSearch::kExhaustive;
  if (mode_name == "run-middles") mode = RecalcSearch::kRunMiddles;
  else if (mode_name == "compact") mode = RecalcSearch::kCompact;
  else if (mode_name != "exhaustive") throw Error(ErrorKind::kInvalidArgument, "unknown mode '" + mode_name + "'");
  const ClusterSpec cluster = LoadCluster(m.cluster);
  const auto workloads = LoadWorkloads(m.workloads);
  Scheduler s(cluster, SchedulingOf(m));
  std::vector<JobSchedule> all;
  std::set<std::size_t> pending;
  for (const auto &w : workloads) {
    for (auto &j : s.ScheduleWorkload(w)) {
      for (const auto &o : j.outcomes) {
        if (!o.skip_phase_three) pending.insert(o.node);
      }
      all.push_back(std::move(j));
    }
  }
  Json links = Json::array();
  for (const auto &[node, scheme] : s.schemes()) {
    const std::string id = cluster.nodes[node].id;
    if (!pending.contains(node)) {
      std::cerr << "notice: link " << id << " keeps its scheduling-time scheme (skip_phase_three=1)\n";
      continue;
    }
    const auto sharing = s.placement().SharingSet(node);
    RotationScheme next = OfflineRecalculate(sharing, node, cluster.nodes[node].link_bandwidth,
                                             m.di_pre, SchedulingOf(m).period, mode, &scheme);
    const LinkEvaluation before = EvaluateLink(sharing, cluster.nodes[node].link_bandwidth, &scheme, SchedulingOf(m).period);
    const LinkEvaluation after = EvaluateLink(sharing, cluster.nodes[node].link_bandwidth, &next, SchedulingOf(m).period);
    Json l = SchemeToJson(next);
    l["node_id"] = id;
    l["psi_before"] = before.psi.value_or(std::numbers::pi);
    l["psi_after"] = after.psi.value_or(std::numbers::pi);
    l["xi"] = after.xi;
    links.push_back(l);
    s.SetScheme(node, next);
  }
  if (links.empty()) std::cerr << "notice: nothing to recalculate\n";
  Json out = ScheduleToJson(all, s);
  out["recalculated"] = links;
  Emit(out, m.out);
  return 0;
}

int Simulate(const Manifest &m, const SimFlags &flags) {
  const ClusterSpec cluster = ClusterOf(m);
  auto [trace, doc] = TraceOf(m);
  SimulationConfig c = ConfigOf(m, doc, cluster);
  ApplySimFlags(flags, c);
  c.scheduler = ParseSimScheduler(m.scheduler);
  const SimulationReport r = metronome::Simulate(trace, cluster, c);
  if (m.out.empty()) {
    std::cout << ReportToJson(r).dump(2) << "\n";
  } else {
    WriteRun(r, m.out);
    std::cout << "scheduler=" << r.scheduler << " tct=" << FormatDouble(r.tct)
              << " gamma=" << FormatDouble(r.gamma) << " pauses=" << r.pause_count << "\n";
  }
  return 0;
}

int Compare(const Manifest &m, const SimFlags &flags, const std::vector<std::string> &names) {
  const ClusterSpec cluster = ClusterOf(m);
  auto [trace, doc] = TraceOf(m);
  SimulationConfig c = ConfigOf(m, doc, cluster);
  ApplySimFlags(flags, c);
  std::vector<SimScheduler> list;
  for (const auto &n : names) list.push_back(ParseSimScheduler(n));
  const Comparison cmp = CompareSchedulers(trace, cluster, c, list);
  if (!m.out.empty()) {
    for (const auto &r : cmp.reports) {
      WriteText(std::filesystem::path(m.out) / ("report-" + r.scheduler + ".json"),
                ReportToJson(r).dump(2));
    }
    WriteComparison(cmp.reports, m.out);
  }
  std::cout << SummaryCsv(cmp.reports);
  return 0;
}

int Report(const std::vector<std::string> &inputs, const std::string &out) {
  std::vector<SimulationReport> reports;
  for (const auto &p : inputs) reports.push_back(ReportFromJson(LoadDocument(p)));
  if (out.empty()) {
    std::cout << JobsCsv(reports);
  } else {
    WriteComparison(reports, out);
  }
  return 0;
}

int Oracle(const Manifest &m) {
  const ClusterSpec cluster = LoadCluster(m.cluster);
  const auto workloads = LoadWorkloads(m.workloads);
  const OracleResult r = OracleSolve(cluster, workloads, m.di_pre, SchedulingOf(m).period);
  Json out = Json::object();
  out["gamma"] = r.objectives.gamma;
  out["lambda"] = r.objectives.lambda;
  out["psi"] = r.objectives.psi;
  out["placements_evaluated"] = r.placements_evaluated;
  Json placement = Json::object();
  for (const auto &id : r.placement.PlacedTaskIds()) {
    placement[id] = cluster.nodes[*r.placement.NodeOf(id)].id;
  }
  out["placement"] = placement;
  Json schemes = Json::array();
  for (const auto &[node, s] : r.schemes) schemes.push_back(SchemeToJson(s));
  out["schemes"] = schemes;
  out["xi"] = r.xi;
  Emit(out, m.out);
  return 0;
}

void PrintError(std::string_view kind, std::string_view message) {
  Json e = {{"error", kind}, {"message", message}};
  std::cerr << e.dump() << "\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Network- and priority-aware scheduling of periodic training jobs"};
  app.require_subcommand(1);
  Manifest m;
  SimFlags flags;
  TraceParams tp;
  std::string recalc_mode = "exhaustive";
  std::vector<std::string> schedulers = {"metronome", "agnostic", "exclusive", "latency-only", "ideal"};
  std::vector<std::string> inputs;

  auto *gen = app.add_subcommand("gen-trace", "Generate a synthetic trace");
  gen->add_option("--cluster", m.cluster, "Cluster file (default: built-in testbed)");
  gen->add_option("--seed", m.seed, "Random seed");
  gen->add_option("--out", m.out, "Trace file to write");
  gen->add_option("--horizon", tp.horizon, "Arrival horizon, seconds")->check(CLI::PositiveNumber);
  gen->add_option("--min-duration", tp.min_duration, "Shortest job, seconds")->check(CLI::PositiveNumber);
  gen->add_option("--max-duration", tp.max_duration, "Longest job, seconds")->check(CLI::PositiveNumber);
  gen->add_option("--load-low", tp.load_low, "Lower edge of the GPU load band")->check(CLI::NonNegativeNumber);
  gen->add_option("--load-high", tp.load_high, "Upper edge of the GPU load band")->check(CLI::NonNegativeNumber);

  auto *sched = app.add_subcommand("schedule", "Schedule a workload file on a cluster");
  sched->add_option("--cluster", m.cluster, "Cluster file")->required();
  sched->add_option("--workloads", m.workloads, "Workload file")->required();
  sched->add_option("--scheduler", m.scheduler, "metronome, agnostic, exclusive or latency-only");
  sched->add_option("--out", m.out, "Output JSON (default: stdout)");
  AddThresholds(sched, m);

  auto *sim = app.add_subcommand("simulate", "Run a trace through the simulator");
  sim->add_option("--cluster", m.cluster, "Cluster file (default: built-in testbed)");
  sim->add_option("--trace", m.trace, "Trace file");
  sim->add_option("--workloads", m.workloads, "Workload file, used as a trace");
  sim->add_option("--seed", m.seed, "Overrides the trace seed");
  sim->add_option("--scheduler", m.scheduler, "metronome, agnostic, exclusive, latency-only or ideal");
  sim->add_option("--out", m.out, "Output directory (default: report JSON on stdout)");
  AddThresholds(sim, m);
  AddSimFlags(sim, flags);

  auto *cmp = app.add_subcommand("compare", "Simulate the same trace under several schedulers");
  cmp->add_option("--cluster", m.cluster, "Cluster file (default: built-in testbed)");
  cmp->add_option("--trace", m.trace, "Trace file");
  cmp->add_option("--workloads", m.workloads, "Workload file, used as a trace");
  cmp->add_option("--seed", m.seed, "Overrides the trace seed");
  cmp->add_option("--schedulers", schedulers, "Scheduler list")->delimiter(',');
  cmp->add_option("--out", m.out, "Output directory");
  AddThresholds(cmp, m);
  AddSimFlags(cmp, flags);

  auto *rec = app.add_subcommand("recalc", "Schedule, then recompute rotations for maximal spacing");
  rec->add_option("--cluster", m.cluster, "Cluster file")->required();
  rec->add_option("--workloads", m.workloads, "Workload file")->required();
  rec->add_option("--mode", recalc_mode, "exhaustive, run-middles or compact");
  rec->add_option("--out", m.out, "Output JSON (default: stdout)");
  AddThresholds(rec, m);

  auto *rep = app.add_subcommand("report", "Merge simulation reports into comparison CSVs");
  rep->add_option("inputs", inputs, "report.json files")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", m.out, "Output directory (default: jobs CSV on stdout)");

  auto *orc = app.add_subcommand("oracle", "Brute-force optimum of a small instance");
  orc->add_option("--cluster", m.cluster, "Cluster file")->required();
  orc->add_option("--workloads", m.workloads, "Workload file")->required();
  orc->add_option("--out", m.out, "Output JSON (default: stdout)");
  AddThresholds(orc, m);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    PrintError("InvalidArgument", e.what());
    return kExitInvalid;
  }

  try {
    if (*gen) return GenTrace(m, tp);
    if (*sched) return Schedule(m);
    if (*sim) return Simulate(m, flags);
    if (*cmp) return Compare(m, flags, schedulers);
    if (*rec) return Recalc(m, recalc_mode);
    if (*rep) return Report(inputs, m.out);
    if (*orc) return Oracle(m);
  } catch (const Error &e) {
    PrintError(ToString(e.kind()), e.what());
    switch (e.kind()) {
      case ErrorKind::kInvalidArgument:
      case ErrorKind::kConfig:
      case ErrorKind::kInfeasibleLoad:
      case ErrorKind::kInstanceTooLarge: return kExitInvalid;
      default: return kExitFailure;
    }
  } catch (const std::exception &e) {
    PrintError("Internal", e.what());
    return kExitFailure;
  }
  return 0;
}
