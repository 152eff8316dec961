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

// echoloc: command-line driver for the simulate -> trace -> localize pipeline.
//
//   echoloc run <scenario> [options]
//   echoloc sweep-order <scenario> --orders 0,1,2,3,4 [--repeats N] [options]
//   echoloc dump-map <scenario> [--out map.txt]
//   echoloc dump-map --map map.txt [--out map.txt]
//   echoloc scenario <name> [--out scenario.json]
//
// <scenario> is a JSON file or "builtin:<name>". Exit codes: 0 success,
// 2 bad input, 3 internal invariant violation.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "echoloc/errors.hpp"
#include "echoloc/map_io.hpp"
#include "echoloc/pipeline.hpp"
#include "echoloc/scenario_io.hpp"

namespace {

constexpr int kBadInput = 2;
constexpr int kInvariant = 3;

struct CommonOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::optional<int> max_order;
  std::optional<double> noise_deg;
  std::string out_dir = ".";
  bool dump_paths = false;
  bool dump_particles = false;
  std::vector<std::string> settings;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("scenario", o.scenario, "Scenario JSON file or builtin:<name>")->required();
  cmd->add_option("--seed", o.seed, "Seed for both the simulator and the localizer");
  cmd->add_option("--particles", o.particles, "Particle count");
  cmd->add_option("--max-order", o.max_order, "Maximum traced reflection order");
  cmd->add_option("--noise-deg", o.noise_deg, "Direction noise standard deviation, degrees");
  cmd->add_option("--out-dir", o.out_dir, "Directory for CSV outputs");
  cmd->add_option("--set", o.settings, "Override a config field, key=value (repeatable)");
}

echoloc::Scenario resolve_scenario(const std::string& arg) {
  const std::string prefix = "builtin:";
  if (arg.rfind(prefix, 0) == 0) {
    const auto name = arg.substr(prefix.size());
    auto s = echoloc::builtin_scenario(name);
    if (!s) throw echoloc::ScenarioError(arg, "no builtin scenario with that name");
    return *s;
  }
  return echoloc::load_scenario(arg);
}

std::pair<echoloc::Scenario, echoloc::PipelineConfig> prepare(const CommonOptions& o) {
  echoloc::Scenario scenario = resolve_scenario(o.scenario);
  if (o.seed) scenario.rng_seed = *o.seed;
  if (o.noise_deg) scenario.noise_angle_std = *o.noise_deg * std::numbers::pi / 180.0;
  scenario.validate();

  echoloc::PipelineConfig config = echoloc::default_pipeline_config(scenario);
  if (o.seed) config.localizer.rng_seed = *o.seed;
  if (o.particles) config.localizer.particle_count = *o.particles;
  if (o.max_order) config.trace.max_order = *o.max_order;
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw echoloc::ConfigError("--set expects key=value, got " + kv);
    echoloc::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.trace.validate();
  config.localizer.validate();
  return {scenario, config};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

int cmd_run(const CommonOptions& o) {
  const auto [scenario, config] = prepare(o);
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);

  std::ofstream paths_out;
  std::ofstream particles_out;
  echoloc::RunDumps dumps;
  if (o.dump_paths) {
    paths_out = open_out(dir / "paths.csv");
    dumps.paths = &paths_out;
  }
  if (o.dump_particles) {
    particles_out = open_out(dir / "particles.csv");
    dumps.particles = &particles_out;
  }
  const auto report = echoloc::run_scenario(scenario, config, dumps);
  auto report_out = open_out(dir / "report.csv");
  echoloc::write_report_csv(report_out, report);
  auto estimates_out = open_out(dir / "estimates.csv");
  echoloc::write_estimates_csv(estimates_out, report);
  auto summary_out = open_out(dir / "summary.csv");
  echoloc::write_summary_csv(summary_out, report.summary);

  const auto& s = report.summary;
  std::cout << scenario.name << ": " << s.frames << " frames, mean error " << s.mean_error_m
            << " m, std " << s.std_error_m << " m, converged " << s.convergence_rate * 100.0
            << "%\n";
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::vector<int>& orders, int repeats) {
  const auto [scenario, config] = prepare(o);
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  const auto rows = echoloc::sweep_order(scenario, config, orders, repeats);
  auto out = open_out(dir / "sweep.csv");
  echoloc::write_sweep_csv(out, rows);
  echoloc::write_sweep_csv(std::cout, rows);
  return 0;
}

int cmd_dump_map(const std::string& scenario_arg, const std::string& map_in,
                 const std::string& out_path) {
  if (scenario_arg.empty() == map_in.empty()) {
    throw echoloc::ConfigError("dump-map takes either a scenario or --map, not both");
  }
  const echoloc::OccupancyGrid grid = map_in.empty()
                                          ? echoloc::build_grid(resolve_scenario(scenario_arg))
                                          : echoloc::load_map(map_in);
  if (out_path.empty() || out_path == "-") {
    echoloc::write_map(std::cout, grid);
  } else {
    echoloc::save_map(out_path, grid);
  }
  return 0;
}

int cmd_scenario(const std::string& name, const std::string& out_path) {
  const auto s = echoloc::builtin_scenario(name);
  if (!s) throw echoloc::ScenarioError(name, "no builtin scenario with that name");
  if (out_path.empty() || out_path == "-") {
    std::cout << echoloc::scenario_to_json(*s);
  } else {
    echoloc::save_scenario(out_path, *s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflection-aware sound source localization"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Simulate, trace and localize every frame");
  add_common(run, run_opts);
  run->add_flag("--dump-paths", run_opts.dump_paths, "Write paths.csv");
  run->add_flag("--dump-particles", run_opts.dump_particles, "Write particles.csv");

  CommonOptions sweep_opts;
  std::vector<int> orders{0, 1, 2, 3, 4};
  int repeats = 1;
  auto* sweep = app.add_subcommand("sweep-order", "Error statistics per reflection-order cap");
  add_common(sweep, sweep_opts);
  sweep->add_option("--orders", orders, "Comma-separated order caps")->delimiter(',');
  sweep->add_option("--repeats", repeats, "Seeds per order (seed, seed+1, ...)");

  std::string map_scenario;
  std::string map_in;
  std::string map_out;
  auto* dump = app.add_subcommand("dump-map", "Write the rasterized occupancy map");
  dump->add_option("scenario", map_scenario, "Scenario JSON file or builtin:<name>");
  dump->add_option("--map", map_in, "Re-read an existing map file instead");
  dump->add_option("--out", map_out, "Output path (default stdout)");

  std::string builtin_name;
  std::string scenario_out;
  auto* scen = app.add_subcommand("scenario", "Print a bundled scenario as JSON");
  scen->add_option("name", builtin_name, "static_room | occluded_room | moving_intermittent | silent_room")
      ->required();
  scen->add_option("--out", scenario_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, orders, repeats);
    if (*dump) return cmd_dump_map(map_scenario, map_in, map_out);
    if (*scen) return cmd_scenario(builtin_name, scenario_out);
  } catch (const echoloc::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  } catch (const echoloc::ScenarioError& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad input: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
  return 0;
}
