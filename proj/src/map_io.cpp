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

#include "echoloc/map_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "echoloc/errors.hpp"

namespace echoloc {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf.data(), end);
}

void write_map(std::ostream& out, const OccupancyGrid& grid) {
  const Vec3& o = grid.origin();
  const Aabb& b = grid.bounds();
  out << "voxelgrid " << format_real(grid.resolution());
  for (int a = 0; a < 3; ++a) out << ' ' << format_real(o[a]);
  for (int a = 0; a < 3; ++a) out << ' ' << format_real(b.min[a]);
  for (int a = 0; a < 3; ++a) out << ' ' << format_real(b.max[a]);
  out << '\n';
  for (const auto& k : grid.occupied_keys()) {
    out << k.ix << ' ' << k.iy << ' ' << k.iz << '\n';
  }
}

OccupancyGrid read_map(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("header", "empty map file");
  std::istringstream header(line);
  std::string tag;
  double res = 0.0;
  Vec3 origin;
  Aabb bounds;
  header >> tag >> res >> origin.x() >> origin.y() >> origin.z() >> bounds.min.x() >>
      bounds.min.y() >> bounds.min.z() >> bounds.max.x() >> bounds.max.y() >> bounds.max.z();
  if (!header || tag != "voxelgrid") {
    throw ScenarioError("header", "expected 'voxelgrid <res> <origin> <bounds>'");
  }
  std::string rest;
  if (header >> rest) throw ScenarioError("header", "trailing tokens after bounds");
  if (!(res > 0.0)) throw ScenarioError("header", "resolution must be positive");

  OccupancyGrid grid(origin, res, bounds);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    VoxelKey k;
    row >> k.ix >> k.iy >> k.iz;
    if (!row || (row >> rest)) {
      throw ScenarioError("line " + std::to_string(line_no), "expected 'ix iy iz'");
    }
    try {
      grid.set_occupied(k);
    } catch (const BoundsError& e) {
      throw ScenarioError("line " + std::to_string(line_no), e.what());
    }
  }
  return grid;
}

void save_map(const std::string& path, const OccupancyGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_map(out, grid);
}

OccupancyGrid load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open map file");
  return read_map(in);
}

}  // namespace echoloc
