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

#include "echoloc/scenario_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "echoloc/errors.hpp"

namespace echoloc {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json box_json(const Aabb& b) { return json{{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

double as_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw ScenarioError(field, "expected a number");
  return j.get<double>();
}

Vec3 as_vec(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ScenarioError(field, "expected [x, y, z]");
  return {as_real(j[0], field), as_real(j[1], field), as_real(j[2], field)};
}

Aabb as_box(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("min") || !j.contains("max")) {
    throw ScenarioError(field, "expected {\"min\": [...], \"max\": [...]}");
  }
  return {as_vec(j.at("min"), field + ".min"), as_vec(j.at("max"), field + ".max")};
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ScenarioError(field, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) throw ScenarioError(field, "expected true or false");
  return j.get<bool>();
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["resolution"] = s.resolution;
  if (s.bounds) j["bounds"] = box_json(*s.bounds);
  j["room"] = json::array();
  for (const auto& b : s.room) j["room"].push_back(box_json(b));
  j["mic"] = vec_json(s.mic);
  j["trajectory"] = json::array();
  for (const auto& w : s.trajectory) {
    j["trajectory"].push_back(
        {{"time", w.time}, {"position", vec_json(w.position)}, {"emitting", w.emitting}});
  }
  j["frame_interval"] = s.frame_interval;
  if (s.duration) j["duration"] = *s.duration;
  j["frequency"] = s.frequency;
  j["source_energy"] = s.source_energy;
  j["noise_angle_std"] = s.noise_angle_std;
  j["max_image_order"] = s.max_image_order;
  j["clutter_count"] = s.clutter_count;
  j["absorption"] = s.absorption;
  j["attenuation"] = json::array();
  for (const auto& [f, a] : s.attenuation) j["attenuation"].push_back({f, a});
  j["seed"] = s.rng_seed;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("document", e.what());
  }
  if (!j.is_object()) throw ScenarioError("document", "expected a JSON object");

  static const std::set<std::string> known = {
      "name",      "resolution",    "bounds",          "room",          "mic",
      "trajectory", "frame_interval", "duration",      "frequency",     "source_energy",
      "noise_angle_std", "max_image_order", "clutter_count", "absorption", "attenuation",
      "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ScenarioError(key, "unknown field");
  }

  Scenario s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ScenarioError("name", "expected a string");
    s.name = j["name"].get<std::string>();
  }
  if (j.contains("resolution")) s.resolution = as_real(j["resolution"], "resolution");
  if (j.contains("bounds")) s.bounds = as_box(j["bounds"], "bounds");
  if (j.contains("room")) {
    if (!j["room"].is_array()) throw ScenarioError("room", "expected a list of boxes");
    for (std::size_t i = 0; i < j["room"].size(); ++i) {
      s.room.push_back(as_box(j["room"][i], "room[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("mic")) s.mic = as_vec(j["mic"], "mic");
  if (j.contains("trajectory")) {
    const json& traj = j["trajectory"];
    if (!traj.is_array()) throw ScenarioError("trajectory", "expected a list of waypoints");
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const std::string field = "trajectory[" + std::to_string(i) + "]";
      const json& w = traj[i];
      if (!w.is_object() || !w.contains("time") || !w.contains("position")) {
        throw ScenarioError(field, "expected {\"time\", \"position\", \"emitting\"}");
      }
      Waypoint wp;
      wp.time = as_real(w["time"], field + ".time");
      wp.position = as_vec(w["position"], field + ".position");
      if (w.contains("emitting")) wp.emitting = as_bool(w["emitting"], field + ".emitting");
      s.trajectory.push_back(wp);
    }
  }
  if (j.contains("frame_interval")) s.frame_interval = as_real(j["frame_interval"], "frame_interval");
  if (j.contains("duration")) s.duration = as_real(j["duration"], "duration");
  if (j.contains("frequency")) s.frequency = as_real(j["frequency"], "frequency");
  if (j.contains("source_energy")) s.source_energy = as_real(j["source_energy"], "source_energy");
  if (j.contains("noise_angle_std")) {
    s.noise_angle_std = as_real(j["noise_angle_std"], "noise_angle_std");
  }
  if (j.contains("max_image_order")) {
    s.max_image_order = as_int(j["max_image_order"], "max_image_order");
  }
  if (j.contains("clutter_count")) s.clutter_count = as_int(j["clutter_count"], "clutter_count");
  if (j.contains("absorption")) s.absorption = as_real(j["absorption"], "absorption");
  if (j.contains("attenuation")) {
    const json& table = j["attenuation"];
    if (!table.is_array()) throw ScenarioError("attenuation", "expected [[hz, alpha], ...]");
    s.attenuation.clear();
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::string field = "attenuation[" + std::to_string(i) + "]";
      if (!table[i].is_array() || table[i].size() != 2) {
        throw ScenarioError(field, "expected [hz, alpha]");
      }
      s.attenuation[as_real(table[i][0], field)] = as_real(table[i][1], field);
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ScenarioError("seed", "expected an unsigned integer");
    s.rng_seed = j["seed"].get<std::uint64_t>();
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << scenario_to_json(scenario);
}

}  // namespace echoloc
