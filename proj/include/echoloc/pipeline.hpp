// Copyright 2026 The echoloc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "echoloc/forward_sim.hpp"
#include "echoloc/localizer.hpp"
#include "echoloc/ray_tracer.hpp"

namespace echoloc {

struct PipelineConfig {
  TraceConfig trace;
  LocalizerConfig localizer;
};

/// Tracer physics taken from the scenario (array position, absorption,
/// attenuation), everything else at its default.
PipelineConfig default_pipeline_config(const Scenario& scenario);

/// Applies one `key=value` override, e.g. "trace.max_order=2" or
/// "localizer.sigma_s=0.5". Throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Keys accepted by apply_setting().
std::vector<std::string> setting_keys();

struct FrameRecord {
  int frame = 0;
  double time = 0.0;
  Vec3 ground_truth = Vec3::Zero();
  Estimate estimate;
  double error_m = 0.0;
  int signal_count = 0;
  bool emitting = false;
};

struct RunSummary {
  int frames = 0;
  double mean_error_m = 0.0;
  double std_error_m = 0.0;  // population standard deviation
  double convergence_rate = 0.0;
};

struct RunReport {
  std::vector<FrameRecord> frames;
  RunSummary summary;
};

/// Optional geometry dumps filled while running.
struct RunDumps {
  std::ostream* paths = nullptr;      // ray segments of every frame
  std::ostream* particles = nullptr;  // particle set at the end of every frame
};

/// Per frame: simulate observations, trace each signal, localize. Frames
/// without signals keep the particle set and report the held estimate.
RunReport run_scenario(const Scenario& scenario, const PipelineConfig& config,
                       const RunDumps& dumps = {});

RunSummary summarize(std::span<const FrameRecord> frames);

// report.csv: frame,time,gt_x,gt_y,gt_z,est_x,est_y,est_z,error_m,gv,converged,iterations,signal_count
void write_report_csv(std::ostream& out, const RunReport& report);
// estimates.csv: frame,iterations,converged,mx,my,mz,gv,c11,c12,c13,c22,c23,c33
void write_estimates_csv(std::ostream& out, const RunReport& report);
// summary.csv: frames,mean_error_m,std_error_m,convergence_rate
void write_summary_csv(std::ostream& out, const RunSummary& summary);

struct SweepRow {
  int order = 0;
  RunSummary summary;
};

/// Runs the scenario once per reflection-order cap. With repeats > 1 each
/// order is run with seeds seed, seed + 1, ... and the frames are pooled.
std::vector<SweepRow> sweep_order(const Scenario& scenario, const PipelineConfig& config,
                                  std::span<const int> orders, int repeats = 1);

// sweep.csv: order,mean_error_m,std_error_m,convergence_rate
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace echoloc
