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

#include "echoloc/ray_tracer.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "echoloc/csv.hpp"
#include "echoloc/errors.hpp"

namespace echoloc {

void IncomingSignal::validate() const {
  if (!is_unit(direction)) throw std::invalid_argument("IncomingSignal: direction is not unit");
  if (!(frequency > 0.0)) throw std::invalid_argument("IncomingSignal: frequency must be > 0");
  if (!(energy > 0.0)) throw std::invalid_argument("IncomingSignal: energy must be > 0");
}

AttenuationTable default_attenuation_table() {
  return {{2000.0, 0.0025}, {4000.0, 0.0049}, {8000.0, 0.0113}};
}

void TraceConfig::validate() const {
  if (!(energy_ceiling > 0.0)) throw ConfigError("trace.energy_ceiling must be > 0");
  if (!(absorption >= 0.0 && absorption < 1.0)) {
    throw ConfigError("trace.absorption must lie in [0, 1)");
  }
  if (max_order < 0) throw ConfigError("trace.max_order must be >= 0");
  if (attenuation_table.empty()) throw ConfigError("trace.attenuation table is empty");
  for (const auto& [f, a] : attenuation_table) {
    if (!(f > 0.0) || !(a >= 0.0)) {
      throw ConfigError("trace.attenuation entries need frequency > 0 and alpha >= 0");
    }
  }
  if (max_ray_length && !(*max_ray_length > 0.0)) {
    throw ConfigError("trace.max_ray_length must be > 0");
  }
  if (neighborhood_half_width < 1) throw ConfigError("trace.neighborhood must be >= 1");
  if (!mic_position.allFinite()) throw ConfigError("trace.mic_position is not finite");
}

double TraceConfig::ray_length_cap(const OccupancyGrid& grid) const {
  return max_ray_length.value_or(3.0 * grid.bounds().diagonal());
}

AcousticRay init_ray(const IncomingSignal& signal, const TraceConfig& config) {
  return {config.mic_position, -signal.direction, 0, signal.energy, 0.0};
}

double energy_at(const AcousticRay& ray, double l_prime, double alpha) {
  return ray.initial_energy * std::exp(alpha * l_prime);
}

Vec3 specular_direction(const Vec3& d, const Vec3& n) {
  const double dn = d.dot(n);
  if (!(dn < 0.0)) {
    throw OrientationError("specular_direction: ray does not arrive against the normal");
  }
  return d - 2.0 * dn * n;
}

AcousticRay reflect(const AcousticRay& ray, const HitRecord& hit, const TraceConfig& config,
                    double alpha, double origin_offset) {
  if (!(config.absorption < 1.0)) {
    throw ConfigError("reflect: absorption of 1 leaves no reflected energy");
  }
  AcousticRay next;
  next.origin = hit.hit_point + origin_offset * hit.normal;
  next.direction = specular_direction(ray.direction, hit.normal);
  next.order = ray.order + 1;
  next.initial_energy = energy_at(ray, hit.hit_length, alpha) / (1.0 - config.absorption);
  return next;
}

double attenuation_coeff(const TraceConfig& config, double frequency) {
  const auto& table = config.attenuation_table;
  if (table.empty()) throw ConfigError("attenuation_coeff: empty attenuation table");
  auto upper = table.lower_bound(frequency);
  if (upper == table.begin()) return upper->second;
  if (upper == table.end()) return std::prev(upper)->second;
  const auto lower = std::prev(upper);
  const double w = (frequency - lower->first) / (upper->first - lower->first);
  return lower->second + w * (upper->second - lower->second);
}

RayPath trace_path(const IncomingSignal& signal, const OccupancyGrid& grid,
                   const TraceConfig& config) {
  config.validate();
  const double alpha = attenuation_coeff(config, signal.frequency);
  const double cap = config.ray_length_cap(grid);
  const double offset = 0.5 * grid.resolution();

  RayPath path{{}, signal, Termination::kEscaped};
  AcousticRay ray = init_ray(signal, config);
  while (true) {
    auto hit = traverse_ray(grid, ray.origin, ray.direction, cap);
    if (!hit) {
      ray.length = std::min(cap, grid.bounds().exit_distance(ray.origin, ray.direction));
      if (ray.length > 0.0 || path.rays.empty()) path.rays.push_back(ray);
      path.termination = Termination::kEscaped;
      return path;
    }
    if (hit->hit_length <= 0.0) {
      if (path.rays.empty()) path.rays.push_back(ray);
      path.termination = Termination::kDegenerate;
      return path;
    }
    ray.length = hit->hit_length;
    path.rays.push_back(ray);

    if (ray.order + 1 > config.max_order) {
      path.termination = Termination::kMaxOrder;
      return path;
    }
    const double next_energy =
        energy_at(ray, hit->hit_length, alpha) / (1.0 - config.absorption);
    if (next_energy > config.energy_ceiling) {
      path.termination = Termination::kEnergyCeiling;
      return path;
    }

    const auto hood = collect_neighborhood(grid, hit->voxel, config.neighborhood_half_width);
    try {
      hit->normal = estimate_normal(hood, grid, ray.direction);
    } catch (const DegenerateGeometryError&) {
      // Send the ray back the way it came.
      hit->normal = -ray.direction;
    }
    ray = reflect(ray, *hit, config, alpha, offset);
    if (!grid.bounds().contains(ray.origin)) {
      path.termination = Termination::kEscaped;
      return path;
    }
  }
}

std::vector<RayPath> trace_all(std::span<const IncomingSignal> signals,
                               const OccupancyGrid& grid, const TraceConfig& config) {
  std::vector<RayPath> paths;
  paths.reserve(signals.size());
  for (const auto& s : signals) paths.push_back(trace_path(s, grid, config));
  return paths;
}

void write_paths_header(std::ostream& out) {
  out << "signal_id,order,ox,oy,oz,dx,dy,dz,length,energy\n";
}

void write_path_rows(std::ostream& out, std::span<const RayPath> paths, int first_signal_id) {
  int id = first_signal_id;
  for (const auto& path : paths) {
    for (const auto& r : path.rays) {
      out << id << ',' << r.order << ',' << csv_real(r.origin.x()) << ','
          << csv_real(r.origin.y()) << ',' << csv_real(r.origin.z()) << ','
          << csv_real(r.direction.x()) << ',' << csv_real(r.direction.y()) << ','
          << csv_real(r.direction.z()) << ',' << csv_real(r.length) << ','
          << csv_real(r.initial_energy) << '\n';
    }
    ++id;
  }
}

}  // namespace echoloc
