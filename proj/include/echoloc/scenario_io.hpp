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

#include <string>

#include "echoloc/forward_sim.hpp"

namespace echoloc {

// Scenarios are JSON documents:
//
//   {
//     "name": "static_room",
//     "resolution": 0.1,
//     "bounds": {"min": [x, y, z], "max": [x, y, z]},     (optional)
//     "room": [{"min": [x, y, z], "max": [x, y, z]}, ...],
//     "mic": [x, y, z],
//     "trajectory": [{"time": 0.0, "position": [x, y, z], "emitting": true}, ...],
//     "frame_interval": 0.5,
//     "duration": 2.0,                                       (optional)
//     "frequency": 4000.0,
//     "source_energy": 100.0,
//     "noise_angle_std": 0.0,                                (radians)
//     "max_image_order": 1,
//     "clutter_count": 0,
//     "absorption": 0.1,
//     "attenuation": [[2000.0, 0.0025], [4000.0, 0.0049]],  (Hz, nepers/m)
//     "seed": 7
//   }
//
// Every key except "bounds" and "duration" is optional on input and falls
// back to the Scenario default. Unknown keys are rejected. Reals are written
// in shortest round-trip form, so dump(parse(text)) is lossless.

std::string scenario_to_json(const Scenario& scenario);

/// Throws ScenarioError naming the offending field. The result is validated.
Scenario scenario_from_json(const std::string& text);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& scenario);

}  // namespace echoloc
