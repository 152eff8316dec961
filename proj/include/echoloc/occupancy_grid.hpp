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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "echoloc/geometry.hpp"

namespace echoloc {

/// Integer index of a voxel. The voxel's center is
/// origin + (ix + 0.5, iy + 0.5, iz + 0.5) * resolution.
struct VoxelKey {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  int operator[](int axis) const { return axis == 0 ? ix : (axis == 1 ? iy : iz); }
  int& operator[](int axis) { return axis == 0 ? ix : (axis == 1 ? iy : iz); }

  auto operator<=>(const VoxelKey&) const = default;
};

/// First occupied voxel along a ray. `hit_point` is the entry point into
/// the voxel, not its center. `normal` is zero until a surface normal has
/// been estimated for the hit.
struct HitRecord {
  VoxelKey voxel;
  double hit_length = 0.0;
  Vec3 hit_point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Occupied cells in a cube of side 2 * half_width + 1 around `center`.
struct LocalNeighborhood {
  VoxelKey center;
  std::vector<VoxelKey> cells;
  int half_width = 0;
};

/// Uniform voxel occupancy grid.
///
/// A key is valid when its voxel center lies inside `bounds`. Storage is a
/// dense byte array over the valid key range, so lookups are O(1) and the
/// grid is safe to share read-only between tracing workers once built.
class OccupancyGrid {
 public:
  OccupancyGrid(const Vec3& origin, double resolution, const Aabb& bounds);

  /// Grid whose origin is the lower corner of `bounds`.
  static OccupancyGrid covering(const Aabb& bounds, double resolution);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Aabb& bounds() const { return bounds_; }
  VoxelKey min_key() const { return min_key_; }
  VoxelKey max_key() const { return max_key_; }

  bool in_bounds(const VoxelKey& key) const;
  bool occupied(const VoxelKey& key) const;
  std::size_t occupied_count() const { return occupied_count_; }

  /// Throws BoundsError for keys outside the grid. Idempotent.
  void set_occupied(const VoxelKey& key);

  /// Marks every voxel whose center lies inside `box` (closed). Parts of the
  /// box outside the grid are ignored.
  void rasterize_box(const Aabb& box);

  Vec3 center_of(const VoxelKey& key) const;
  VoxelKey key_of(const Vec3& p) const;
  Aabb voxel_box(const VoxelKey& key) const;

  /// All occupied keys in lexicographic (ix, iy, iz) order.
  std::vector<VoxelKey> occupied_keys() const;

 private:
  std::size_t index_of(const VoxelKey& key) const;

  Vec3 origin_;
  double resolution_;
  Aabb bounds_;
  VoxelKey min_key_;
  VoxelKey max_key_;
  std::array<std::size_t, 3> dims_{};
  std::vector<std::uint8_t> cells_;
  std::size_t occupied_count_ = 0;
};

/// Called for each voxel a ray passes through, with the parameter at which
/// the ray enters it (0 for the start voxel). Return false to stop.
using VoxelVisitor = std::function<bool(const VoxelKey&, double entry)>;

/// Grid DDA walk from `origin` along unit `direction`, visiting every voxel
/// the ray passes through, in order of entry parameter, until the ray
/// leaves `grid.bounds()` or passes `max_length`.
void visit_voxels(const OccupancyGrid& grid, const Vec3& origin, const Vec3& direction,
                  double max_length, const VoxelVisitor& visit);

/// First occupied voxel crossed by the ray, with the entry parameter as
/// hit_length. A ray starting inside an occupied voxel hits at length 0.
/// The returned record has a zero normal.
std::optional<HitRecord> traverse_ray(const OccupancyGrid& grid, const Vec3& origin,
                                      const Vec3& direction, double max_length);

LocalNeighborhood collect_neighborhood(const OccupancyGrid& grid, const VoxelKey& center,
                                       int half_width);

/// Least-squares plane normal through `points`: the left singular vector of
/// the centered sample matrix with the smallest singular value. The sign is
/// chosen so that normal . incoming_direction < 0.
///
/// Throws DegenerateGeometryError for fewer than 3 points, collinear points
/// or an incoming direction lying in the fitted plane.
Vec3 fit_plane_normal(std::span<const Vec3> points, const Vec3& incoming_direction);

/// Smoothed surface normal at a hit, fitted to the neighborhood's voxel centers.
Vec3 estimate_normal(const LocalNeighborhood& neighborhood, const OccupancyGrid& grid,
                     const Vec3& incoming_direction);

}  // namespace echoloc
