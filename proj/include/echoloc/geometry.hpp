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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

namespace echoloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Axis-aligned box, closed on both ends. Used for map bounds, room
/// elements and the localization volume.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Aabb() = default;
  Aabb(const Vec3& lo, const Vec3& hi) : min(lo), max(hi) {}

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  double volume() const;

  bool contains(const Vec3& p, double eps = 0.0) const;
  bool intersects(const Aabb& other) const;
  bool degenerate() const;  // zero extent on at least one axis

  Aabb merged(const Aabb& other) const;
  Vec3 clamp(const Vec3& p) const;

  /// Parameter at which a ray starting inside the box leaves it.
  /// Requires a unit (or at least nonzero) direction.
  double exit_distance(const Vec3& origin, const Vec3& direction) const;

  /// Slab test. Returns the [entry, exit] parameter interval of the line
  /// origin + t * direction inside the box, or nothing if it misses.
  std::optional<std::pair<double, double>> clip(const Vec3& origin,
                                                const Vec3& direction) const;
};

/// Tolerance used when checking that a direction is unit length.
inline constexpr double kUnitTolerance = 1e-9;

inline bool is_unit(const Vec3& v, double tol = kUnitTolerance) {
  return std::abs(v.norm() - 1.0) <= tol;
}

}  // namespace echoloc
