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

#include "echoloc/occupancy_grid.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "echoloc/errors.hpp"

namespace echoloc {
namespace {

// Slack for voxel centers that sit exactly on a box face.
constexpr double kCenterEps = 1e-9;

std::string key_string(const VoxelKey& k) {
  return "(" + std::to_string(k.ix) + ", " + std::to_string(k.iy) + ", " +
         std::to_string(k.iz) + ")";
}

// Range of indices whose voxel center lies in [lo, hi].
std::pair<int, int> center_range(double lo, double hi, double origin, double res) {
  const int first = static_cast<int>(std::ceil((lo - origin) / res - 0.5 - kCenterEps));
  const int last = static_cast<int>(std::floor((hi - origin) / res - 0.5 + kCenterEps));
  return {first, last};
}

}  // namespace

OccupancyGrid::OccupancyGrid(const Vec3& origin, double resolution, const Aabb& bounds)
    : origin_(origin), resolution_(resolution), bounds_(bounds) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("OccupancyGrid: resolution must be positive");
  }
  if ((bounds.max.array() < bounds.min.array()).any()) {
    throw std::invalid_argument("OccupancyGrid: bounds max is below bounds min");
  }
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    const auto [first, last] = center_range(bounds.min[a], bounds.max[a], origin[a], resolution);
    min_key_[a] = first;
    max_key_[a] = last;
    dims_[a] = last >= first ? static_cast<std::size_t>(last - first + 1) : 0;
    total *= dims_[a];
  }
  cells_.assign(total, 0);
}

OccupancyGrid OccupancyGrid::covering(const Aabb& bounds, double resolution) {
  return OccupancyGrid(bounds.min, resolution, bounds);
}

bool OccupancyGrid::in_bounds(const VoxelKey& key) const {
  for (int a = 0; a < 3; ++a) {
    if (key[a] < min_key_[a] || key[a] > max_key_[a]) return false;
  }
  return true;
}

std::size_t OccupancyGrid::index_of(const VoxelKey& key) const {
  const auto x = static_cast<std::size_t>(key.ix - min_key_.ix);
  const auto y = static_cast<std::size_t>(key.iy - min_key_.iy);
  const auto z = static_cast<std::size_t>(key.iz - min_key_.iz);
  return (z * dims_[1] + y) * dims_[0] + x;
}

bool OccupancyGrid::occupied(const VoxelKey& key) const {
  return in_bounds(key) && cells_[index_of(key)] != 0;
}

void OccupancyGrid::set_occupied(const VoxelKey& key) {
  if (!in_bounds(key)) {
    throw BoundsError("set_occupied: key " + key_string(key) + " outside grid bounds");
  }
  auto& cell = cells_[index_of(key)];
  if (cell == 0) {
    cell = 1;
    ++occupied_count_;
  }
}

void OccupancyGrid::rasterize_box(const Aabb& box) {
  VoxelKey lo;
  VoxelKey hi;
  for (int a = 0; a < 3; ++a) {
    const auto [first, last] = center_range(box.min[a], box.max[a], origin_[a], resolution_);
    lo[a] = std::max(first, min_key_[a]);
    hi[a] = std::min(last, max_key_[a]);
    if (hi[a] < lo[a]) return;
  }
  for (int z = lo.iz; z <= hi.iz; ++z) {
    for (int y = lo.iy; y <= hi.iy; ++y) {
      for (int x = lo.ix; x <= hi.ix; ++x) {
        set_occupied({x, y, z});
      }
    }
  }
}

Vec3 OccupancyGrid::center_of(const VoxelKey& key) const {
  return origin_ + resolution_ * Vec3(key.ix + 0.5, key.iy + 0.5, key.iz + 0.5);
}

VoxelKey OccupancyGrid::key_of(const Vec3& p) const {
  const Vec3 f = ((p - origin_) / resolution_).array().floor();
  return {static_cast<int>(f.x()), static_cast<int>(f.y()), static_cast<int>(f.z())};
}

Aabb OccupancyGrid::voxel_box(const VoxelKey& key) const {
  const Vec3 lo = origin_ + resolution_ * Vec3(key.ix, key.iy, key.iz);
  return {lo, lo + Vec3::Constant(resolution_)};
}

std::vector<VoxelKey> OccupancyGrid::occupied_keys() const {
  std::vector<VoxelKey> keys;
  keys.reserve(occupied_count_);
  for (int x = min_key_.ix; x <= max_key_.ix; ++x) {
    for (int y = min_key_.iy; y <= max_key_.iy; ++y) {
      for (int z = min_key_.iz; z <= max_key_.iz; ++z) {
        if (cells_[index_of({x, y, z})] != 0) keys.push_back({x, y, z});
      }
    }
  }
  return keys;
}

void visit_voxels(const OccupancyGrid& grid, const Vec3& origin, const Vec3& direction,
                  double max_length, const VoxelVisitor& visit) {
  if (!origin.allFinite() || !is_unit(direction)) {
    throw std::invalid_argument("visit_voxels: direction must be a finite unit vector");
  }
  if (!grid.bounds().contains(origin, kCenterEps)) {
    throw BoundsError("visit_voxels: ray origin outside grid bounds");
  }
  const double limit = std::min(max_length, grid.bounds().exit_distance(origin, direction));
  const double res = grid.resolution();
  const Vec3& grid_origin = grid.origin();

  VoxelKey key = grid.key_of(origin);
  const VoxelKey lo = grid.min_key();
  const VoxelKey hi = grid.max_key();
  for (int a = 0; a < 3; ++a) key[a] = std::clamp(key[a], lo[a], hi[a]);
  std::array<int, 3> step{};
  std::array<double, 3> t_next{};
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Boundary crossings are recomputed from the absolute boundary position
  // on every step so error does not accumulate along long rays.
  const auto next_crossing = [&](int axis, double t_floor) {
    if (step[axis] == 0) return kInf;
    const int boundary = key[axis] + (step[axis] > 0 ? 1 : 0);
    const double t = (grid_origin[axis] + boundary * res - origin[axis]) / direction[axis];
    return std::max(t, t_floor);
  };
  for (int a = 0; a < 3; ++a) {
    step[a] = direction[a] > 0.0 ? 1 : (direction[a] < 0.0 ? -1 : 0);
    t_next[a] = next_crossing(a, 0.0);
  }

  double entry = 0.0;
  while (true) {
    if (!visit(key, entry)) return;
    int axis = 0;
    if (t_next[1] < t_next[axis]) axis = 1;
    if (t_next[2] < t_next[axis]) axis = 2;
    entry = t_next[axis];
    if (!(entry <= limit)) return;
    key[axis] += step[axis];
    if (!grid.in_bounds(key)) return;
    t_next[axis] = next_crossing(axis, entry);
  }
}

std::optional<HitRecord> traverse_ray(const OccupancyGrid& grid, const Vec3& origin,
                                      const Vec3& direction, double max_length) {
  std::optional<HitRecord> hit;
  visit_voxels(grid, origin, direction, max_length, [&](const VoxelKey& key, double entry) {
    if (!grid.occupied(key)) return true;
    hit = HitRecord{key, entry, origin + direction * entry, Vec3::Zero()};
    return false;
  });
  return hit;
}

LocalNeighborhood collect_neighborhood(const OccupancyGrid& grid, const VoxelKey& center,
                                       int half_width) {
  if (half_width < 0) throw std::invalid_argument("collect_neighborhood: negative half_width");
  LocalNeighborhood hood{center, {}, half_width};
  for (int dz = -half_width; dz <= half_width; ++dz) {
    for (int dy = -half_width; dy <= half_width; ++dy) {
      for (int dx = -half_width; dx <= half_width; ++dx) {
        const VoxelKey k{center.ix + dx, center.iy + dy, center.iz + dz};
        if (grid.occupied(k)) hood.cells.push_back(k);
      }
    }
  }
  return hood;
}

Vec3 fit_plane_normal(std::span<const Vec3> points, const Vec3& incoming_direction) {
  if (points.size() < 3) {
    throw DegenerateGeometryError("plane fit needs at least 3 points, got " +
                                  std::to_string(points.size()));
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::Matrix<double, 3, Eigen::Dynamic> offsets(3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    offsets.col(static_cast<Eigen::Index>(i)) = points[i] - mean;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 3, Eigen::Dynamic>> svd(offsets,
                                                                     Eigen::ComputeFullU);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-9 * sv[0]) {
    throw DegenerateGeometryError("plane fit points are coincident or collinear");
  }
  Vec3 normal = svd.matrixU().col(2).normalized();
  const double facing = normal.dot(incoming_direction);
  if (std::abs(facing) < 1e-12) {
    throw DegenerateGeometryError("incoming direction lies in the fitted plane");
  }
  if (facing > 0.0) normal = -normal;
  return normal;
}

Vec3 estimate_normal(const LocalNeighborhood& neighborhood, const OccupancyGrid& grid,
                     const Vec3& incoming_direction) {
  std::vector<Vec3> centers;
  centers.reserve(neighborhood.cells.size());
  for (const auto& k : neighborhood.cells) centers.push_back(grid.center_of(k));
  return fit_plane_normal(centers, incoming_direction);
}

}  // namespace echoloc
