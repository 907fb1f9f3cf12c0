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

// Synthetic trace generation: Poisson arrivals thinned so that the fraction
// of busy GPUs stays inside a target band.

#pragma once

#include "metronome/model.hpp"
#include "metronome/simulator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace metronome {

/// One job template. Every task takes one GPU.
struct ModelTemplate {
  std::string name;
  double period = 0.0;      // seconds
  double duty_cycle = 0.0;
  double bandwidth = 0.0;   // bits/s
  int tasks = 1;
  Priority priority = Priority::kLow;
  bool low_comm = false;
};

/// Thirteen vision and language models, fine-tuned (high) or pre-trained (low).
std::vector<ModelTemplate> DefaultCatalog();

struct TraceParams {
  double horizon = 300.0;        // seconds of arrivals
  double min_duration = 37.5;    // seconds per job
  double max_duration = 112.5;
  double load_low = 0.60;        // fraction of GPUs busy
  double load_high = 0.85;
  double mean_interarrival = 4.0;  // seconds, before thinning
  std::vector<ModelTemplate> catalog = DefaultCatalog();
};

/// 3 x 4 GPUs at 25 Gb/s and 1 x 1 GPU at 10 Gb/s.
ClusterSpec DefaultCluster();

struct LoadSample {
  double time = 0.0;
  double load = 0.0;
};

/// Busy-GPU fraction at each arrival and departure, assuming every job starts
/// on arrival and runs for its nominal duration.
std::vector<LoadSample> LoadProfile(const Trace &trace, const ClusterSpec &cluster);

/// Throws kInfeasibleLoad when the band cannot be met by this cluster and
/// kInvalidArgument for non-positive parameters. A zero upper bound yields
/// an empty trace.
Trace GenerateTrace(std::uint64_t seed, const TraceParams &params,
                    const ClusterSpec &cluster);

}  // namespace metronome
