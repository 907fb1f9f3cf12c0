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

// Reading and writing cluster, workload and trace files. JSON and YAML are
// both accepted; quantities may carry units ("25Gbps", "200ms", "16Gi").

#pragma once

#include "metronome/model.hpp"
#include "metronome/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace metronome {

using Json = nlohmann::ordered_json;

/// Parses a file as JSON when it looks like JSON, as YAML otherwise.
Json LoadDocument(const std::filesystem::path &path);

/// Number, or string with a unit suffix. `kind` selects the unit family:
/// "bandwidth" (bps, Kbps, Mbps, Gbps), "time" (s, ms, us), "bytes" (Ki, Mi,
/// Gi, K, M, G).
double ParseQuantity(const Json &value, std::string_view kind);

ClusterSpec ClusterFromJson(const Json &doc);
Json ClusterToJson(const ClusterSpec &cluster);
ClusterSpec LoadCluster(const std::filesystem::path &path);

/// Accepts {"workloads": [...]} or a bare list. Submit order is assigned in
/// file order.
std::vector<WorkloadSpec> WorkloadsFromJson(const Json &doc);
Json WorkloadsToJson(const std::vector<WorkloadSpec> &workloads);
std::vector<WorkloadSpec> LoadWorkloads(const std::filesystem::path &path);

Trace TraceFromJson(const Json &doc);
Json TraceToJson(const Trace &trace);
Trace LoadTrace(const std::filesystem::path &path);

/// Optional "simulation" block of a workload or trace file: sigma, tick,
/// bucket, monitoring, stage_three, background and pattern_changes.
void ApplySimulationBlock(const Json &doc, const ClusterSpec &cluster,
                          SimulationConfig &config);

/// Writes text with a trailing newline; creates parent directories.
void WriteText(const std::filesystem::path &path, const std::string &text);

}  // namespace metronome
