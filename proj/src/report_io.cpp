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

#include "metronome/report_io.hpp"

#include <array>
#include <charconv>
#include <set>
#include <sstream>

namespace metronome {

namespace {

std::string Header(std::string_view kind, const std::vector<SimulationReport> &reports) {
  std::set<std::uint64_t> seeds;
  for (const auto &r : reports) seeds.insert(r.seed);
  std::string seed;
  for (auto s : seeds) seed += (seed.empty() ? "" : ",") + std::to_string(s);
  if (seed.empty()) seed = "0";
  std::ostringstream out;
  out << "# metronome-csv schema=" << kCsvSchemaVersion << " kind=" << kind << " seed=" << seed
      << "\n";
  return out.str();
}

std::string Csv(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string FormatDouble(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return ec == std::errc() ? std::string(buf.data(), p) : std::string("nan");
}

Json SchemeToJson(const RotationScheme &scheme) {
  Json j = Json::object();
  j["node"] = scheme.node;
  j["di_pre"] = scheme.di_pre;
  j["t_l"] = scheme.t_l;
  j["reference"] = scheme.reference;
  Json idx = Json::object();
  for (const auto &[k, v] : scheme.index) idx[k] = v;
  j["index"] = idx;
  Json sh = Json::object();
  for (const auto &[k, v] : scheme.time_shifts) sh[k] = v;
  j["time_shifts"] = sh;
  return j;
}

Json ReportToJson(const SimulationReport &r) {
  Json out = Json::object();
  out["scheduler"] = r.scheduler;
  out["seed"] = r.seed;
  out["sigma"] = r.sigma;
  out["tick"] = r.tick;
  out["bucket"] = r.bucket;
  out["tct"] = r.tct;
  out["gamma"] = r.gamma;
  out["pause_count"] = r.pause_count;
  Json jobs = Json::array();
  for (const auto &j : r.jobs) {
    Json o = Json::object();
    o["id"] = j.id;
    o["workload"] = j.workload_id;
    o["priority"] = std::string(ToString(j.priority));
    o["accepted"] = j.accepted;
    o["accepted_on_arrival"] = j.accepted_on_arrival;
    o["arrival"] = j.arrival;
    o["admit_time"] = j.admit_time;
    o["completion_time"] = j.completion_time;
    o["mean_iteration"] = j.mean_iteration;
    o["per_1000"] = j.per_1000;
    o["pauses"] = j.pauses;
    o["nodes"] = j.nodes;
    o["iteration_start"] = j.iteration_start;
    o["iterations"] = j.iterations;
    jobs.push_back(o);
  }
  out["jobs"] = jobs;
  Json links = Json::array();
  for (const auto &l : r.links) {
    links.push_back({{"node", l.node},
                     {"node_id", l.node_id},
                     {"utilization", l.utilization},
                     {"series", l.series}});
  }
  out["links"] = links;
  Json adj = Json::array();
  for (const auto &a : r.readjustments) {
    adj.push_back({{"time", a.time},
                   {"job", a.job_id},
                   {"action", a.action},
                   {"amount", a.amount},
                   {"next_start", a.next_start},
                   {"parent", a.parent},
                   {"parent_start", a.parent_start},
                   {"parent_shift", a.parent_shift},
                   {"shift", a.shift},
                   {"period", a.period}});
  }
  out["readjustments"] = adj;
  Json adm = Json::array();
  for (const auto &a : r.admissions) {
    adm.push_back({{"time", a.time}, {"job", a.job_id}, {"accepted", a.accepted}, {"reason", a.reason}});
  }
  out["admissions"] = adm;
  return out;
}

SimulationReport ReportFromJson(const Json &doc) {
  SimulationReport r;
  try {
    r.scheduler = doc.at("scheduler").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.sigma = doc.at("sigma").get<double>();
    r.tick = doc.at("tick").get<double>();
    r.bucket = doc.at("bucket").get<double>();
    r.tct = doc.at("tct").get<double>();
    r.gamma = doc.at("gamma").get<double>();
    r.pause_count = doc.at("pause_count").get<int>();
    for (const auto &o : doc.at("jobs")) {
      JobReport j;
      j.id = o.at("id").get<std::string>();
      j.workload_id = o.at("workload").get<std::string>();
      j.priority = ParsePriority(o.at("priority").get<std::string>());
      j.accepted = o.at("accepted").get<bool>();
      j.accepted_on_arrival = o.at("accepted_on_arrival").get<bool>();
      j.arrival = o.at("arrival").get<double>();
      j.admit_time = o.at("admit_time").get<double>();
      j.completion_time = o.at("completion_time").get<double>();
      j.mean_iteration = o.at("mean_iteration").get<double>();
      j.per_1000 = o.at("per_1000").get<double>();
      j.pauses = o.at("pauses").get<int>();
      j.nodes = o.at("nodes").get<std::vector<std::size_t>>();
      j.iteration_start = o.at("iteration_start").get<std::vector<double>>();
      j.iterations = o.at("iterations").get<std::vector<double>>();
      r.jobs.push_back(std::move(j));
    }
    for (const auto &o : doc.at("links")) {
      LinkReport l;
      l.node = o.at("node").get<std::size_t>();
      l.node_id = o.at("node_id").get<std::string>();
      l.utilization = o.at("utilization").get<double>();
      l.series = o.at("series").get<std::vector<double>>();
      r.links.push_back(std::move(l));
    }
    for (const auto &o : doc.at("readjustments")) {
      Readjustment a;
      a.time = o.at("time").get<double>();
      a.job_id = o.at("job").get<std::string>();
      a.action = o.at("action").get<std::string>();
      a.amount = o.at("amount").get<double>();
      a.next_start = o.at("next_start").get<double>();
      a.parent = o.at("parent").get<std::string>();
      a.parent_start = o.at("parent_start").get<double>();
      a.parent_shift = o.at("parent_shift").get<double>();
      a.shift = o.at("shift").get<double>();
      a.period = o.at("period").get<double>();
      r.readjustments.push_back(std::move(a));
    }
    for (const auto &o : doc.at("admissions")) {
      r.admissions.push_back({o.at("time").get<double>(), o.at("job").get<std::string>(),
                              o.at("accepted").get<bool>(), o.at("reason").get<std::string>()});
    }
  } catch (const Json::exception &e) {
    throw Error(ErrorKind::kConfig, std::string("malformed report: ") + e.what());
  }
  return r;
}

Json ScheduleToJson(const std::vector<JobSchedule> &jobs, const Scheduler &scheduler) {
  Json out = Json::object();
  Json list = Json::array();
  for (const auto &j : jobs) {
    Json o = Json::object();
    o["job"] = j.job_id;
    o["accepted"] = j.accepted;
    if (!j.accepted) {
      o["failed_task"] = j.failed_task;
      o["reason"] = j.reason;
    }
    Json pods = Json::array();
    for (const auto &p : j.outcomes) {
      Json s = Json::object();
      s["task"] = p.task_id;
      s["node"] = scheduler.cluster().nodes[p.node].id;
      s["score"] = p.score;
      s["early_return"] = p.early_return;
      s["skip_phase_three"] = p.skip_phase_three;
      Json sh = Json::object();
      for (const auto &[k, v] : p.shifts) sh[k] = v;
      s["shifts"] = sh;
      s["sharing_set"] = p.sharing_set;
      pods.push_back(s);
    }
    o["pods"] = pods;
    list.push_back(o);
  }
  out["jobs"] = list;
  Json schemes = Json::array();
  for (const auto &[node, s] : scheduler.schemes()) {
    Json js = SchemeToJson(s);
    js["node_id"] = scheduler.cluster().nodes[node].id;
    schemes.push_back(js);
  }
  out["schemes"] = schemes;
  Json shifts = Json::object();
  for (const auto &[node, s] : scheduler.schemes()) {
    for (const auto &[task, v] : s.time_shifts) shifts[task] = v;
  }
  out["shifts"] = shifts;
  return out;
}

std::string IterationsCsv(const std::vector<SimulationReport> &reports) {
  std::string out = Header("iterations", reports);
  out += "scheduler,job,workload,priority,iteration,start,duration\n";
  for (const auto &r : reports) {
    for (const auto &j : r.jobs) {
      for (std::size_t k = 0; k < j.iterations.size(); ++k) {
        out += Csv(r.scheduler) + "," + Csv(j.id) + "," + Csv(j.workload_id) + "," +
               std::string(ToString(j.priority)) + "," + std::to_string(k) + "," +
               FormatDouble(k < j.iteration_start.size() ? j.iteration_start[k] : 0.0) + "," +
               FormatDouble(j.iterations[k]) + "\n";
      }
    }
  }
  return out;
}

std::string UtilizationCsv(const std::vector<SimulationReport> &reports) {
  std::string out = Header("utilization", reports);
  out += "scheduler,node,bucket,start,end,utilization\n";
  for (const auto &r : reports) {
    for (const auto &l : r.links) {
      for (std::size_t k = 0; k < l.series.size(); ++k) {
        out += Csv(r.scheduler) + "," + Csv(l.node_id) + "," + std::to_string(k) + "," +
               FormatDouble(k * r.bucket) + "," + FormatDouble((k + 1) * r.bucket) + "," +
               FormatDouble(l.series[k]) + "\n";
      }
    }
  }
  return out;
}

std::string JobsCsv(const std::vector<SimulationReport> &reports) {
  std::string out = Header("jobs", reports);
  out += "scheduler,job,workload,priority,accepted,accepted_on_arrival,arrival,admit_time,"
         "completion_time,iterations,mean_iteration,per_1000,pauses\n";
  for (const auto &r : reports) {
    for (const auto &j : r.jobs) {
      out += Csv(r.scheduler) + "," + Csv(j.id) + "," + Csv(j.workload_id) + "," +
             std::string(ToString(j.priority)) + "," + (j.accepted ? "1" : "0") + "," +
             (j.accepted_on_arrival ? "1" : "0") + "," + FormatDouble(j.arrival) + "," +
             FormatDouble(j.admit_time) + "," + FormatDouble(j.completion_time) + "," +
             std::to_string(j.iterations.size()) + "," + FormatDouble(j.mean_iteration) + "," +
             FormatDouble(j.per_1000) + "," + std::to_string(j.pauses) + "\n";
    }
  }
  return out;
}

std::string SummaryCsv(const std::vector<SimulationReport> &reports) {
  std::string out = Header("summary", reports);
  out += "scheduler,tct,tct_delta,gamma,mean_high,mean_low,accepted,accepted_on_arrival,pauses\n";
  const double base = reports.empty() ? 0.0 : reports.front().tct;
  for (const auto &r : reports) {
    int accepted = 0;
    int on_arrival = 0;
    for (const auto &j : r.jobs) {
      accepted += j.accepted ? 1 : 0;
      on_arrival += j.accepted_on_arrival ? 1 : 0;
    }
    out += Csv(r.scheduler) + "," + FormatDouble(r.tct) + "," +
           FormatDouble(base > 0.0 ? (r.tct - base) / base : 0.0) + "," + FormatDouble(r.gamma) +
           "," + FormatDouble(MeanIteration(r, Priority::kHigh)) + "," +
           FormatDouble(MeanIteration(r, Priority::kLow)) + "," + std::to_string(accepted) + "," +
           std::to_string(on_arrival) + "," + std::to_string(r.pause_count) + "\n";
  }
  return out;
}

std::string ReadjustmentsCsv(const std::vector<SimulationReport> &reports) {
  std::string out = Header("readjustments", reports);
  out += "scheduler,time,job,action,amount,next_start,parent,parent_start,parent_shift,shift,"
         "period\n";
  for (const auto &r : reports) {
    for (const auto &a : r.readjustments) {
      out += Csv(r.scheduler) + "," + FormatDouble(a.time) + "," + Csv(a.job_id) + "," + a.action +
             "," + FormatDouble(a.amount) + "," + FormatDouble(a.next_start) + "," +
             Csv(a.parent) + "," + FormatDouble(a.parent_start) + "," +
             FormatDouble(a.parent_shift) + "," + FormatDouble(a.shift) + "," +
             FormatDouble(a.period) + "\n";
    }
  }
  return out;
}

void WriteRun(const SimulationReport &report, const std::filesystem::path &dir) {
  WriteText(dir / "report.json", ReportToJson(report).dump(2));
  WriteComparison({report}, dir);
}

void WriteComparison(const std::vector<SimulationReport> &reports,
                     const std::filesystem::path &dir) {
  WriteText(dir / "iterations.csv", IterationsCsv(reports));
  WriteText(dir / "utilization.csv", UtilizationCsv(reports));
  WriteText(dir / "jobs.csv", JobsCsv(reports));
  WriteText(dir / "summary.csv", SummaryCsv(reports));
  WriteText(dir / "readjustments.csv", ReadjustmentsCsv(reports));
}

}  // namespace metronome
