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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "echoloc/geometry.hpp"
#include "echoloc/occupancy_grid.hpp"

namespace echoloc {

/// One direction-of-arrival observation: the unit direction the sound
/// travels in when it reaches the array, its dominant frequency and the
/// energy measured at the array.
struct IncomingSignal {
  Vec3 direction = Vec3::UnitX();
  double frequency = 4000.0;  // Hz
  double energy = 1.0;        // J

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// One straight segment of an inverse acoustic path. Order 0 starts at the
/// array; order k has been reflected k times.
struct AcousticRay {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  int order = 0;
  double initial_energy = 0.0;
  double length = 0.0;

  Vec3 at(double l) const { return origin + direction * l; }
  Vec3 end() const { return at(length); }
};

enum class Termination {
  kMaxOrder,       // next ray would exceed the reflection order cap
  kEnergyCeiling,  // next ray's energy would exceed the ceiling
  kEscaped,        // ray left the map or reached the length cap without a hit
  kDegenerate,     // reflected ray restarted inside an occupied voxel
};

struct RayPath {
  std::vector<AcousticRay> rays;
  IncomingSignal source_signal;
  Termination termination = Termination::kEscaped;
};

/// Air attenuation per frequency, nepers per meter. Interpolated linearly
/// between entries and clamped outside the table.
using AttenuationTable = std::map<double, double>;

/// Room-air magnitudes at 20 C and 50% relative humidity. Placeholder
/// values; override per deployment.
AttenuationTable default_attenuation_table();

struct TraceConfig {
  Vec3 mic_position = Vec3::Zero();
  double absorption = 0.1;  // fraction lost per reflection, [0, 1)
  AttenuationTable attenuation_table = default_attenuation_table();
  double energy_ceiling = 900.0;  // J
  int max_order = 4;
  std::optional<double> max_ray_length;  // m; unset means 3x the map diagonal
  int neighborhood_half_width = 2;

  void validate() const;  // throws ConfigError

  double ray_length_cap(const OccupancyGrid& grid) const;
};

AcousticRay init_ray(const IncomingSignal& signal, const TraceConfig& config);

/// Energy of `ray` after travelling `l_prime` meters, amplified by the
/// inverse of exponential air decay.
double energy_at(const AcousticRay& ray, double l_prime, double alpha);

/// Mirror `d` about the plane with unit normal `n`. Throws OrientationError
/// unless d . n < 0.
Vec3 specular_direction(const Vec3& d, const Vec3& n);

/// Next-order ray leaving `hit`. The origin is moved `origin_offset` meters
/// along the hit normal so re-traversal does not start inside the surface.
/// The returned ray has length 0 until it is traced.
AcousticRay reflect(const AcousticRay& ray, const HitRecord& hit, const TraceConfig& config,
                    double alpha, double origin_offset);

double attenuation_coeff(const TraceConfig& config, double frequency);

/// Inverse-trace one signal through `grid`. Always returns at least the
/// order-0 ray. Checks run in the order: order cap, energy ceiling, escape.
RayPath trace_path(const IncomingSignal& signal, const OccupancyGrid& grid,
                   const TraceConfig& config);

std::vector<RayPath> trace_all(std::span<const IncomingSignal> signals,
                               const OccupancyGrid& grid, const TraceConfig& config);

// CSV dump: signal_id,order,ox,oy,oz,dx,dy,dz,length,energy
void write_paths_header(std::ostream& out);
void write_path_rows(std::ostream& out, std::span<const RayPath> paths, int first_signal_id);

}  // namespace echoloc
