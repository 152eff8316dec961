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

#include <numbers>
#include <random>
#include <vector>

#include "echoloc/geometry.hpp"
#include "echoloc/ray_tracer.hpp"
#include "support/oracles.hpp"

namespace echoloc::fixture {

inline const Aabb kRoom(Vec3(0, 0, 0), Vec3(7, 7, 3));

// A single-ray path starting at `origin`, passing through `through` and
// running on to the room boundary.
inline RayPath ray_through(const Vec3& origin, const Vec3& through, const Aabb& room = kRoom) {
  AcousticRay r;
  r.origin = origin;
  r.direction = (through - origin).normalized();
  r.order = 0;
  r.initial_energy = 1.0;
  r.length = room.exit_distance(origin, r.direction);
  RayPath p;
  p.rays = {r};
  p.source_signal.direction = -r.direction;
  return p;
}

struct Crossing {
  Vec3 point;
  std::vector<RayPath> paths;
};

// Two rays through a random common point. Ray origins are at least
// `min_reach` from the point and the rays meet at `min_angle` or more.
inline Crossing random_crossing(std::mt19937_64& rng, double min_reach = 1.0,
                                double min_angle = 10.0 * std::numbers::pi / 180,
                                const Aabb& room = kRoom) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto inside = [&](double margin) {
    const Vec3 lo = room.min + Vec3::Constant(margin);
    const Vec3 ext = room.extent() - Vec3::Constant(2 * margin);
    return Vec3(lo.x() + u(rng) * ext.x(), lo.y() + u(rng) * ext.y(), lo.z() + u(rng) * ext.z());
  };
  while (true) {
    Crossing c;
    c.point = inside(0.0);
    const Vec3 a = inside(0.0);
    const Vec3 b = inside(0.0);
    if ((a - c.point).norm() < min_reach || (b - c.point).norm() < min_reach) continue;
    const double angle = oracle::angle_between(c.point - a, c.point - b);
    if (angle < min_angle || angle > std::numbers::pi - min_angle) continue;
    c.paths = {ray_through(a, c.point, room), ray_through(b, c.point, room)};
    return c;
  }
}

}  // namespace echoloc::fixture
