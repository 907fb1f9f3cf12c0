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

#include "metronome/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace metronome {

namespace {

[[noreturn]] void Fail(const std::string &what) { throw Error(ErrorKind::kConfig, what); }

Json FromYaml(const YAML::Node &node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      Json out = Json::array();
      for (const auto &item : node) out.push_back(FromYaml(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Json out = Json::object();
      for (const auto &kv : node) out[kv.first.as<std::string>()] = FromYaml(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar: break;
  }
  const std::string s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "null" || s == "~") return nullptr;
  std::int64_t i = 0;
  auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ei == std::errc() && pi == s.data() + s.size()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ed == std::errc() && pd == s.data() + s.size()) return d;
  return s;
}

const Json &Need(const Json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key)) Fail(where + ": missing '" + key + "'");
  return obj.at(key);
}

std::string Str(const Json &v, const std::string &where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  Fail(where + ": expected a string");
}

double Num(const Json &obj, const char *key, double fallback, std::string_view kind = "") {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return ParseQuantity(obj.at(key), kind);
}

bool Bool(const Json &obj, const char *key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) Fail(std::string("'") + key + "' must be a boolean");
  return obj.at(key).get<bool>();
}

TaskSpec TaskFromJson(const Json &t, const JobSpec &job, const std::string &id) {
  TaskSpec task;
  task.id = id;
  task.job_id = job.id;
  task.workload_id = job.workload_id;
  task.priority = job.priority;
  task.low_comm = Bool(t, "low_comm", false);
  if (!task.low_comm) {
    task.period = Num(t, "period", 0.0, "time");
    task.duty_cycle = Num(t, "duty_cycle", 0.0);
    task.bandwidth = Num(t, "bandwidth", 0.0, "bandwidth");
  }
  task.request.cpu = Num(t, "cpu", 0.0);
  task.request.mem = Num(t, "mem", 0.0, "bytes");
  task.request.gpu = Num(t, "gpu", 0.0);
  return task;
}

Json TaskToJson(const TaskSpec &t) {
  Json j = Json::object();
  j["id"] = t.id;
  if (t.low_comm) {
    j["low_comm"] = true;
  } else {
    j["period"] = t.period;
    j["duty_cycle"] = t.duty_cycle;
    j["bandwidth"] = t.bandwidth;
  }
  j["cpu"] = t.request.cpu;
  j["mem"] = t.request.mem;
  j["gpu"] = t.request.gpu;
  return j;
}

WorkloadSpec WorkloadFromJson(const Json &w) {
  WorkloadSpec ws;
  ws.id = Str(Need(w, "id", "workload"), "workload id");
  const std::string where = "workload '" + ws.id + "'";
  ws.arrival = Num(w, "arrival", 0.0, "time");
  for (const auto &j : Need(w, "jobs", where)) {
    JobSpec job;
    job.id = Str(Need(j, "id", where + " job"), where + " job id");
    job.workload_id = ws.id;
    job.priority = ParsePriority(j.value("priority", std::string("low")));
    job.iterations = static_cast<std::int64_t>(Num(j, "iterations", 0.0));
    job.duration = Num(j, "duration", 0.0, "time");
    const std::string jw = "job '" + job.id + "'";
    if (j.contains("tasks")) {
      int k = 0;
      for (const auto &t : j.at("tasks")) {
        const std::string id =
            t.contains("id") ? Str(t.at("id"), jw) : job.id + "-" + std::to_string(k);
        job.tasks.push_back(TaskFromJson(t, job, id));
        ++k;
      }
    } else {
      const int replicas = static_cast<int>(Num(j, "replicas", 1.0));
      const Json &tpl = Need(j, "template", jw);
      for (int k = 0; k < replicas; ++k) {
        job.tasks.push_back(TaskFromJson(tpl, job, job.id + "-" + std::to_string(k)));
      }
    }
    ws.jobs.push_back(std::move(job));
  }
  if (w.contains("dependencies")) {
    for (const auto &d : w.at("dependencies")) {
      if (!d.is_array() || d.size() != 2) Fail(where + ": dependencies are [a, b] pairs");
      ws.dependencies.emplace_back(Str(d[0], where), Str(d[1], where));
    }
  }
  return ws;
}

Json WorkloadToJson(const WorkloadSpec &w) {
  Json out = Json::object();
  out["id"] = w.id;
  out["arrival"] = w.arrival;
  Json deps = Json::array();
  for (const auto &[a, b] : w.dependencies) deps.push_back({a, b});
  out["dependencies"] = deps;
  Json jobs = Json::array();
  for (const auto &j : w.jobs) {
    Json job = Json::object();
    job["id"] = j.id;
    job["priority"] = std::string(ToString(j.priority));
    if (j.iterations > 0) job["iterations"] = j.iterations;
    if (j.duration > 0.0) job["duration"] = j.duration;
    Json tasks = Json::array();
    for (const auto &t : j.tasks) tasks.push_back(TaskToJson(t));
    job["tasks"] = tasks;
    jobs.push_back(job);
  }
  out["jobs"] = jobs;
  return out;
}

}  // namespace

Json LoadDocument(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) Fail("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
      return Json::parse(text);
    }
    return FromYaml(YAML::Load(text));
  } catch (const Json::exception &e) {
    Fail(path.string() + ": " + e.what());
  } catch (const YAML::Exception &e) {
    Fail(path.string() + ": " + e.what());
  }
}

double ParseQuantity(const Json &value, std::string_view kind) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) Fail("expected a number");
  const std::string s = value.get<std::string>();
  double v = 0.0;
  const char *begin = s.data();
  const char *end = s.data() + s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc()) Fail("bad quantity '" + s + "'");
  std::string unit(p, end);
  std::erase_if(unit, [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  if (unit.empty()) return v;
  static const std::map<std::string, double> kBandwidth = {
      {"bps", 1.0}, {"Kbps", 1e3}, {"Mbps", 1e6}, {"Gbps", 1e9}, {"K", 1e3}, {"M", 1e6}, {"G", 1e9}};
  static const std::map<std::string, double> kTime = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}};
  static const std::map<std::string, double> kBytes = {
      {"B", 1.0},    {"K", 1e3},  {"M", 1e6},  {"G", 1e9},  {"T", 1e12},
      {"Ki", 1024.0}, {"Mi", 1048576.0}, {"Gi", 1073741824.0}, {"Ti", 1099511627776.0}};
  const std::map<std::string, double> *table = nullptr;
  if (kind == "bandwidth") table = &kBandwidth;
  if (kind == "time") table = &kTime;
  if (kind == "bytes") table = &kBytes;
  if (table == nullptr || !table->contains(unit)) Fail("unknown unit in '" + s + "'");
  return v * table->at(unit);
}

ClusterSpec ClusterFromJson(const Json &doc) {
  ClusterSpec c;
  for (const auto &n : Need(doc, "nodes", "cluster")) {
    NodeSpec node;
    node.id = Str(Need(n, "id", "node"), "node id");
    node.capacity.cpu = Num(n, "cpu", 0.0);
    node.capacity.mem = Num(n, "mem", 0.0, "bytes");
    node.capacity.gpu = Num(n, "gpu", 0.0);
    node.link_bandwidth = Num(n, "bandwidth", 0.0, "bandwidth");
    c.nodes.push_back(node);
  }
  const auto size = static_cast<Eigen::Index>(c.nodes.size());
  if (doc.contains("latency")) {
    const Json &l = doc.at("latency");
    if (!l.is_array() || static_cast<Eigen::Index>(l.size()) != size) {
      Fail("latency must be a square matrix over the nodes");
    }
    c.latency.resize(size, size);
    for (Eigen::Index x = 0; x < size; ++x) {
      if (!l[x].is_array() || static_cast<Eigen::Index>(l[x].size()) != size) {
        Fail("latency must be a square matrix over the nodes");
      }
      for (Eigen::Index y = 0; y < size; ++y) c.latency(x, y) = l[x][y].get<double>();
    }
  } else {
    // Without a topology every remote pair costs the same.
    c.latency = Eigen::MatrixXd::Constant(size, size, 2.0);
    c.latency.diagonal().setOnes();
  }
  try {
    c.Finalize();
  } catch (const Error &e) {
    Fail(e.what());
  }
  return c;
}

Json ClusterToJson(const ClusterSpec &cluster) {
  Json out = Json::object();
  Json nodes = Json::array();
  for (const auto &n : cluster.nodes) {
    nodes.push_back({{"id", n.id},
                     {"cpu", n.capacity.cpu},
                     {"mem", n.capacity.mem},
                     {"gpu", n.capacity.gpu},
                     {"bandwidth", n.link_bandwidth}});
  }
  out["nodes"] = nodes;
  Json lat = Json::array();
  for (Eigen::Index x = 0; x < cluster.latency.rows(); ++x) {
    Json row = Json::array();
    for (Eigen::Index y = 0; y < cluster.latency.cols(); ++y) row.push_back(cluster.latency(x, y));
    lat.push_back(row);
  }
  out["latency"] = lat;
  return out;
}

ClusterSpec LoadCluster(const std::filesystem::path &path) { return ClusterFromJson(LoadDocument(path)); }

std::vector<WorkloadSpec> WorkloadsFromJson(const Json &doc) {
  const Json &list = doc.is_array() ? doc : Need(doc, "workloads", "workload file");
  std::vector<WorkloadSpec> out;
  for (const auto &w : list) out.push_back(WorkloadFromJson(w));
  AssignSubmitOrder(out);
  try {
    for (const auto &w : out) w.Validate();
  } catch (const Error &e) {
    Fail(e.what());
  }
  return out;
}

Json WorkloadsToJson(const std::vector<WorkloadSpec> &workloads) {
  Json list = Json::array();
  for (const auto &w : workloads) list.push_back(WorkloadToJson(w));
  return Json{{"workloads", list}};
}

std::vector<WorkloadSpec> LoadWorkloads(const std::filesystem::path &path) {
  return WorkloadsFromJson(LoadDocument(path));
}

Trace TraceFromJson(const Json &doc) {
  Trace t;
  if (doc.is_object() && doc.contains("seed")) t.seed = doc.at("seed").get<std::uint64_t>();
  t.workloads = WorkloadsFromJson(doc);
  std::stable_sort(t.workloads.begin(), t.workloads.end(),
                   [](const auto &a, const auto &b) { return a.arrival < b.arrival; });
  return t;
}

Json TraceToJson(const Trace &trace) {
  Json out = Json::object();
  out["seed"] = trace.seed;
  out["workloads"] = WorkloadsToJson(trace.workloads).at("workloads");
  return out;
}

Trace LoadTrace(const std::filesystem::path &path) { return TraceFromJson(LoadDocument(path)); }

void ApplySimulationBlock(const Json &doc, const ClusterSpec &cluster, SimulationConfig &config) {
  if (!doc.is_object() || !doc.contains("simulation")) return;
  const Json &s = doc.at("simulation");
  config.sigma = Num(s, "sigma", config.sigma);
  config.tick = Num(s, "tick", config.tick, "time");
  config.bucket = Num(s, "bucket", config.bucket, "time");
  config.max_time = Num(s, "max_time", config.max_time, "time");
  config.monitoring = Bool(s, "monitoring", config.monitoring);
  config.stage_three = Bool(s, "stage_three", config.stage_three);
  config.retry_rejected = Bool(s, "retry_rejected", config.retry_rejected);
  if (s.contains("background")) {
    for (const auto &b : s.at("background")) {
      BackgroundFlow f;
      f.node = cluster.IndexOf(Str(Need(b, "node", "background flow"), "background node"));
      f.rate = Num(b, "rate", 0.0, "bandwidth");
      f.start = Num(b, "start", 0.0, "time");
      f.end = Num(b, "end", config.max_time, "time");
      config.background.push_back(f);
    }
  }
  if (s.contains("pattern_changes")) {
    for (const auto &c : s.at("pattern_changes")) {
      PatternChange p;
      p.time = Num(c, "time", 0.0, "time");
      p.job_id = Str(Need(c, "job", "pattern change"), "pattern change job");
      p.duty_cycle = Num(c, "duty_cycle", 0.0);
      p.period = Num(c, "period", 0.0, "time");
      config.pattern_changes.push_back(p);
    }
  }
}

void WriteText(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot write '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

}  // namespace metronome
