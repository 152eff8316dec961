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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echoloc/geometry.hpp"
#include "echoloc/localizer.hpp"
#include "echoloc/occupancy_grid.hpp"
#include "echoloc/ray_tracer.hpp"

namespace echoloc {

struct Waypoint {
  double time = 0.0;  // s
  Vec3 position = Vec3::Zero();
  bool emitting = true;  // holds until the next waypoint
};

/// Synthetic acoustic scene: solid axis-aligned boxes, a fixed array and a
/// source trajectory, plus the physical constants the simulator applies.
struct Scenario {
  std::string name = "scenario";
  std::vector<Aabb> room;
  std::optional<Aabb> bounds;  // defaults to the union of `room`
  double resolution = 0.1;     // m
  Vec3 mic = Vec3::Zero();
  std::vector<Waypoint> trajectory;
  double frame_interval = 0.5;    // s
  std::optional<double> duration; // s; defaults to the trajectory span
  double frequency = 4000.0;      // Hz
  double source_energy = 100.0;   // J
  double noise_angle_std = 0.0;   // rad
  int max_image_order = 1;
  int clutter_count = 0;
  double absorption = 0.1;
  AttenuationTable attenuation = default_attenuation_table();
  std::uint64_t rng_seed = 1;

  /// Throws ScenarioError naming the first invalid field.
  void validate() const;

  Aabb map_bounds() const;
  bool in_interior(const Vec3& p) const;
  Vec3 source_at(double time) const;  // linear interpolation, clamped
  bool emitting_at(double time) const;
  std::vector<double> frame_times() const;
};

/// Occupancy grid with every room box rasterized.
OccupancyGrid build_grid(const Scenario& scenario);

/// Six slabs of the given thickness enclosing `interior`.
std::vector<Aabb> box_room_shell(const Aabb& interior, double thickness);

/// One planar face of a room box. `outward` is +1 or -1 along `axis`.
struct Face {
  int axis = 0;
  double coord = 0.0;
  int outward = 1;
  Aabb rect;  // the face itself, flat along `axis`
};

std::vector<Face> room_faces(std::span<const Aabb> room);

struct ImageSource {
  Vec3 position;
  int reflection_count = 0;
};

/// Image sources up to `max_order`, mirrored only across faces the parent
/// image lies in front of. Positions closer than 1e-6 are merged, keeping
/// the lowest order.
std::vector<ImageSource> image_sources(std::span<const Aabb> room, const Vec3& source,
                                       int max_order);

/// Line of sight from a to b through the grid. Occupied voxels touching
/// either endpoint are ignored, so reflection points on a surface count as
/// visible from the room side.
bool visible(const OccupancyGrid& grid, const Vec3& a, const Vec3& b);

/// A valid propagation path from the source to the array.
struct PropagationPath {
  int order = 0;
  std::vector<Vec3> reflection_points;  // in order from the array side
  double length = 0.0;                  // total source-to-array distance
  Vec3 image = Vec3::Zero();
};

struct ObservationFrame {
  double time = 0.0;
  Vec3 ground_truth_source = Vec3::Zero();
  bool emitting = false;
  std::vector<IncomingSignal> signals;
  std::vector<PropagationPath> paths;  // same order as the first paths.size() signals
};

/// Unobstructed specular paths from `source` to `mic`, at most one per
/// arrival direction.
std::vector<PropagationPath> propagation_paths(const Scenario& scenario,
                                               const OccupancyGrid& grid, const Vec3& source);

/// Rotates `v` by `angle` about an axis orthogonal to it.
Vec3 rotate_off_axis(const Vec3& v, const Vec3& axis_hint, double angle);

/// Observations a direction-of-arrival front end would report at `time`.
/// Directions are perturbed by a rotation of |N(0, noise_angle_std)| about a
/// random orthogonal axis; `clutter_count` random spurious signals are added.
ObservationFrame generate_frame(const Scenario& scenario, const OccupancyGrid& grid,
                                double time, Rng& rng);

// Bundled scenes.
Scenario static_room_scenario();
Scenario occluded_room_scenario();
Scenario moving_intermittent_scenario();
Scenario silent_room_scenario();

/// Looks up a bundled scene by name; empty when unknown.
std::optional<Scenario> builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace echoloc
