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

#include "echoloc/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "echoloc/csv.hpp"
#include "echoloc/errors.hpp"

namespace echoloc {
namespace {

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a real number, got '" + value + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

Vec3 parse_vec(const std::string& key, const std::string& value) {
  std::vector<double> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(parse_real(key, item));
  if (parts.size() != 3) throw ConfigError(key + ": expected x,y,z");
  return {parts[0], parts[1], parts[2]};
}

// "2000:0.0025,4000:0.0049"
AttenuationTable parse_table(const std::string& key, const std::string& value) {
  AttenuationTable table;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": expected hz:alpha pairs");
    table[parse_real(key, item.substr(0, colon))] = parse_real(key, item.substr(colon + 1));
  }
  if (table.empty()) throw ConfigError(key + ": empty table");
  return table;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"trace.mic_position",
       [](auto& c, auto& k, auto& v) { c.trace.mic_position = parse_vec(k, v); }},
      {"trace.absorption",
       [](auto& c, auto& k, auto& v) { c.trace.absorption = parse_real(k, v); }},
      {"trace.attenuation",
       [](auto& c, auto& k, auto& v) { c.trace.attenuation_table = parse_table(k, v); }},
      {"trace.energy_ceiling",
       [](auto& c, auto& k, auto& v) { c.trace.energy_ceiling = parse_real(k, v); }},
      {"trace.max_order",
       [](auto& c, auto& k, auto& v) { c.trace.max_order = static_cast<int>(parse_integer(k, v)); }},
      {"trace.max_ray_length",
       [](auto& c, auto& k, auto& v) { c.trace.max_ray_length = parse_real(k, v); }},
      {"trace.neighborhood",
       [](auto& c, auto& k, auto& v) {
         c.trace.neighborhood_half_width = static_cast<int>(parse_integer(k, v));
       }},
      {"localizer.particles",
       [](auto& c, auto& k, auto& v) {
         c.localizer.particle_count = static_cast<int>(parse_integer(k, v));
       }},
      {"localizer.sigma_s",
       [](auto& c, auto& k, auto& v) { c.localizer.sigma_s = parse_real(k, v); }},
      {"localizer.sigma_c",
       [](auto& c, auto& k, auto& v) { c.localizer.sigma_c = parse_real(k, v); }},
      {"localizer.sigma_w_floor",
       [](auto& c, auto& k, auto& v) { c.localizer.sigma_w_floor = parse_real(k, v); }},
      {"localizer.sigma_w_scale",
       [](auto& c, auto& k, auto& v) { c.localizer.sigma_w_scale = parse_real(k, v); }},
      {"localizer.max_iterations",
       [](auto& c, auto& k, auto& v) {
         c.localizer.max_iterations = static_cast<int>(parse_integer(k, v));
       }},
      {"localizer.seed",
       [](auto& c, auto& k, auto& v) {
         c.localizer.rng_seed = static_cast<std::uint64_t>(parse_integer(k, v));
       }},
      {"localizer.reset_per_frame",
       [](auto& c, auto& k, auto& v) { c.localizer.reset_per_frame = parse_bool(k, v); }},
      {"localizer.array_exclusion_radius",
       [](auto& c, auto& k, auto& v) { c.localizer.array_exclusion_radius = parse_real(k, v); }},
  };
  return table;
}

void check_estimate(const Estimate& e) {
  const double asym = (e.covariance - e.covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) throw InvariantError("estimate covariance is not symmetric");
  if (e.gv < -1e-12) throw InvariantError("estimate covariance has a negative determinant");
  if (!e.mean.allFinite()) throw InvariantError("estimate mean is not finite");
}

}  // namespace

PipelineConfig default_pipeline_config(const Scenario& scenario) {
  PipelineConfig config;
  config.trace.mic_position = scenario.mic;
  config.trace.absorption = scenario.absorption;
  config.trace.attenuation_table = scenario.attenuation;
  config.localizer.rng_seed = scenario.rng_seed;
  return config;
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown setting '" + key + "'");
  it->second(config, key, value);
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

RunSummary summarize(std::span<const FrameRecord> frames) {
  RunSummary s;
  s.frames = static_cast<int>(frames.size());
  if (frames.empty()) return s;
  double sum = 0.0;
  int converged = 0;
  for (const auto& f : frames) {
    sum += f.error_m;
    converged += f.estimate.converged ? 1 : 0;
  }
  const double n = static_cast<double>(frames.size());
  s.mean_error_m = sum / n;
  double sq = 0.0;
  for (const auto& f : frames) sq += (f.error_m - s.mean_error_m) * (f.error_m - s.mean_error_m);
  s.std_error_m = std::sqrt(sq / n);
  s.convergence_rate = converged / n;
  return s;
}

RunReport run_scenario(const Scenario& scenario, const PipelineConfig& config,
                       const RunDumps& dumps) {
  scenario.validate();
  config.trace.validate();
  config.localizer.validate();

  const OccupancyGrid grid = build_grid(scenario);
  Localizer localizer(grid.bounds(), config.localizer);
  RunReport report;
  int signal_id = 0;
  if (dumps.paths) write_paths_header(*dumps.paths);
  if (dumps.particles) write_particles_header(*dumps.particles);

  const auto times = scenario.frame_times();
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::seed_seq seq{scenario.rng_seed, static_cast<std::uint64_t>(i), std::uint64_t{0x51}};
    Rng frame_rng(seq);
    const ObservationFrame frame = generate_frame(scenario, grid, times[i], frame_rng);
    const auto paths = trace_all(frame.signals, grid, config.trace);

    FrameRecord rec;
    rec.frame = static_cast<int>(i);
    rec.time = frame.time;
    rec.ground_truth = frame.ground_truth_source;
    rec.signal_count = static_cast<int>(frame.signals.size());
    rec.emitting = frame.emitting;
    rec.estimate = paths.empty() ? localizer.hold() : localizer.run(paths);
    check_estimate(rec.estimate);
    rec.error_m = (rec.estimate.mean - rec.ground_truth).norm();
    report.frames.push_back(rec);

    if (dumps.paths) {
      write_path_rows(*dumps.paths, paths, signal_id);
      signal_id += static_cast<int>(paths.size());
    }
    if (dumps.particles) {
      write_particle_rows(*dumps.particles, localizer.particles(), localizer.total_iterations());
    }
  }
  report.summary = summarize(report.frames);
  return report;
}

void write_report_csv(std::ostream& out, const RunReport& report) {
  out << "frame,time,gt_x,gt_y,gt_z,est_x,est_y,est_z,error_m,gv,converged,iterations,"
         "signal_count\n";
  for (const auto& f : report.frames) {
    const auto& e = f.estimate;
    out << f.frame << ',' << csv_real(f.time) << ',' << csv_real(f.ground_truth.x()) << ','
        << csv_real(f.ground_truth.y()) << ',' << csv_real(f.ground_truth.z()) << ','
        << csv_real(e.mean.x()) << ',' << csv_real(e.mean.y()) << ',' << csv_real(e.mean.z())
        << ',' << csv_real(f.error_m) << ',' << csv_real(e.gv) << ',' << (e.converged ? 1 : 0)
        << ',' << e.iterations_used << ',' << f.signal_count << '\n';
  }
}

void write_estimates_csv(std::ostream& out, const RunReport& report) {
  out << "frame,iterations,converged,mx,my,mz,gv,c11,c12,c13,c22,c23,c33\n";
  for (const auto& f : report.frames) {
    const auto& e = f.estimate;
    const Mat3& c = e.covariance;
    out << f.frame << ',' << e.iterations_used << ',' << (e.converged ? 1 : 0) << ','
        << csv_real(e.mean.x()) << ',' << csv_real(e.mean.y()) << ',' << csv_real(e.mean.z())
        << ',' << csv_real(e.gv) << ',' << csv_real(c(0, 0)) << ',' << csv_real(c(0, 1)) << ','
        << csv_real(c(0, 2)) << ',' << csv_real(c(1, 1)) << ',' << csv_real(c(1, 2)) << ','
        << csv_real(c(2, 2)) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const RunSummary& s) {
  out << "frames,mean_error_m,std_error_m,convergence_rate\n"
      << s.frames << ',' << csv_real(s.mean_error_m) << ',' << csv_real(s.std_error_m) << ','
      << csv_real(s.convergence_rate) << '\n';
}

std::vector<SweepRow> sweep_order(const Scenario& scenario, const PipelineConfig& config,
                                  std::span<const int> orders, int repeats) {
  if (orders.empty()) throw ConfigError("sweep needs at least one order");
  if (repeats < 1) throw ConfigError("sweep repeats must be >= 1");
  std::vector<SweepRow> rows;
  for (const int order : orders) {
    if (order < 0) throw ConfigError("sweep orders must be >= 0");
    std::vector<FrameRecord> pooled;
    for (int r = 0; r < repeats; ++r) {
      Scenario s = scenario;
      s.rng_seed = scenario.rng_seed + static_cast<std::uint64_t>(r);
      PipelineConfig c = config;
      c.trace.max_order = order;
      c.localizer.rng_seed = config.localizer.rng_seed + static_cast<std::uint64_t>(r);
      const auto report = run_scenario(s, c);
      pooled.insert(pooled.end(), report.frames.begin(), report.frames.end());
    }
    rows.push_back({order, summarize(pooled)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "order,mean_error_m,std_error_m,convergence_rate\n";
  for (const auto& r : rows) {
    out << r.order << ',' << csv_real(r.summary.mean_error_m) << ','
        << csv_real(r.summary.std_error_m) << ',' << csv_real(r.summary.convergence_rate)
        << '\n';
  }
}

}  // namespace echoloc
