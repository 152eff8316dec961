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
#include <string>

#include "echoloc/occupancy_grid.hpp"

namespace echoloc {

// Plain-text voxel map:
//
//   voxelgrid <resolution> <ox> <oy> <oz> <bx0> <by0> <bz0> <bx1> <by1> <bz1>
//   <ix> <iy> <iz>
//   ...
//
// Occupied keys are written in lexicographic order, one per line. Reals use
// the shortest representation that round-trips.

void write_map(std::ostream& out, const OccupancyGrid& grid);

/// Throws ScenarioError naming the line that failed to parse.
OccupancyGrid read_map(std::istream& in);

void save_map(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid load_map(const std::string& path);

/// Shortest round-trip decimal form of `v`.
std::string format_real(double v);

}  // namespace echoloc
