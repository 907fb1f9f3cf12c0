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

// Report serialization. Every CSV starts with a comment line carrying the
// schema version and the run seed, e.g.
//   # metronome-csv schema=1 kind=iterations seed=42

#pragma once

#include "metronome/config_io.hpp"
#include "metronome/scheduler.hpp"
#include "metronome/simulator.hpp"

#include <string>
#include <vector>

namespace metronome {

inline constexpr int kCsvSchemaVersion = 1;

/// Shortest text that reads back to the same double.
std::string FormatDouble(double v);

Json SchemeToJson(const RotationScheme &scheme);
Json ReportToJson(const SimulationReport &report);
SimulationReport ReportFromJson(const Json &doc);

/// Placements, scores and shifts of one-shot scheduling.
Json ScheduleToJson(const std::vector<JobSchedule> &jobs, const Scheduler &scheduler);

/// kind=iterations: scheduler,job,workload,priority,iteration,start,duration
std::string IterationsCsv(const std::vector<SimulationReport> &reports);
/// kind=utilization: scheduler,node,bucket,start,end,utilization
std::string UtilizationCsv(const std::vector<SimulationReport> &reports);
/// kind=jobs: one row per job and report.
std::string JobsCsv(const std::vector<SimulationReport> &reports);
/// kind=summary: one row per report, deltas against the first.
std::string SummaryCsv(const std::vector<SimulationReport> &reports);
/// kind=readjustments: the controller log.
std::string ReadjustmentsCsv(const std::vector<SimulationReport> &reports);

/// Writes report.json plus the CSV set for a single run into `dir`.
void WriteRun(const SimulationReport &report, const std::filesystem::path &dir);
/// Writes the merged CSV set (comparison inputs for plotting) into `dir`.
void WriteComparison(const std::vector<SimulationReport> &reports,
                     const std::filesystem::path &dir);

}  // namespace metronome
