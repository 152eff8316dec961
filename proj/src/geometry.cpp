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

#include "echoloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace echoloc {

double Aabb::volume() const {
  const Vec3 e = extent().cwiseMax(0.0);
  return e.x() * e.y() * e.z();
}

bool Aabb::contains(const Vec3& p, double eps) const {
  for (int a = 0; a < 3; ++a) {
    if (p[a] < min[a] - eps || p[a] > max[a] + eps) return false;
  }
  return true;
}

bool Aabb::intersects(const Aabb& other) const {
  for (int a = 0; a < 3; ++a) {
    if (other.max[a] < min[a] || other.min[a] > max[a]) return false;
  }
  return true;
}

bool Aabb::degenerate() const { return (extent().array() <= 0.0).any(); }

Aabb Aabb::merged(const Aabb& other) const {
  return {min.cwiseMin(other.min), max.cwiseMax(other.max)};
}

Vec3 Aabb::clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }

double Aabb::exit_distance(const Vec3& origin, const Vec3& direction) const {
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (direction[a] > 0.0) {
      t_exit = std::min(t_exit, (max[a] - origin[a]) / direction[a]);
    } else if (direction[a] < 0.0) {
      t_exit = std::min(t_exit, (min[a] - origin[a]) / direction[a]);
    }
  }
  return std::max(t_exit, 0.0);
}

std::optional<std::pair<double, double>> Aabb::clip(const Vec3& origin,
                                                    const Vec3& direction) const {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (direction[a] == 0.0) {
      if (origin[a] < min[a] || origin[a] > max[a]) return std::nullopt;
      continue;
    }
    double lo = (min[a] - origin[a]) / direction[a];
    double hi = (max[a] - origin[a]) / direction[a];
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

}  // namespace echoloc
