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

#include "echoloc/forward_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "echoloc/errors.hpp"

namespace echoloc {
namespace {

// Tolerances for points that sit on faces or voxel boundaries.
constexpr double kFaceEps = 1e-9;
constexpr double kSegmentEps = 1e-6;

std::string indexed(const std::string& field, std::size_t i) {
  return field + "[" + std::to_string(i) + "]";
}

bool inside_any(std::span<const Aabb> boxes, const Vec3& p) {
  return std::any_of(boxes.begin(), boxes.end(),
                     [&](const Aabb& b) { return b.contains(p); });
}

struct ImageNode {
  Vec3 position;
  std::vector<int> faces;  // mirrored across faces[0], then faces[1], ...
};

// Depth-first expansion of the image tree, pruned to faces the parent lies
// in front of.
void expand_images(std::span<const Face> faces, const ImageNode& node, int remaining,
                   std::vector<ImageNode>& out) {
  out.push_back(node);
  if (remaining == 0) return;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    const double height = (node.position[face.axis] - face.coord) * face.outward;
    if (height <= kFaceEps) continue;
    ImageNode child = node;
    child.position[face.axis] = 2.0 * face.coord - node.position[face.axis];
    child.faces.push_back(static_cast<int>(f));
    expand_images(faces, child, remaining - 1, out);
  }
}

std::vector<ImageNode> image_tree(std::span<const Face> faces, const Vec3& source,
                                  int max_order) {
  std::vector<ImageNode> nodes;
  expand_images(faces, ImageNode{source, {}}, std::max(max_order, 0), nodes);
  std::stable_sort(nodes.begin(), nodes.end(), [](const ImageNode& a, const ImageNode& b) {
    return a.faces.size() < b.faces.size();
  });
  return nodes;
}

bool on_face(const Face& face, const Vec3& q) {
  for (int a = 0; a < 3; ++a) {
    if (a == face.axis) continue;
    if (q[a] < face.rect.min[a] - kFaceEps || q[a] > face.rect.max[a] + kFaceEps) return false;
  }
  return true;
}

// Walk an image chain back from the array toward the real source, checking
// that every reflection lands on its face and every leg is unobstructed.
std::optional<PropagationPath> unfold(std::span<const Face> faces, const OccupancyGrid& grid,
                                      const ImageNode& node, const Vec3& source,
                                      const Vec3& mic) {
  const int order = static_cast<int>(node.faces.size());
  // images[j] is the image after j mirrorings; images[0] is the source.
  std::vector<Vec3> images(static_cast<std::size_t>(order) + 1);
  images[0] = source;
  for (int j = 0; j < order; ++j) {
    const Face& face = faces[static_cast<std::size_t>(node.faces[static_cast<std::size_t>(j)])];
    images[static_cast<std::size_t>(j) + 1] = images[static_cast<std::size_t>(j)];
    images[static_cast<std::size_t>(j) + 1][face.axis] =
        2.0 * face.coord - images[static_cast<std::size_t>(j)][face.axis];
  }

  PropagationPath path;
  path.order = order;
  path.image = images.back();
  path.length = (mic - path.image).norm();
  if (!(path.length > kSegmentEps)) return std::nullopt;

  Vec3 from = mic;
  for (int j = order; j >= 1; --j) {
    const Face& face =
        faces[static_cast<std::size_t>(node.faces[static_cast<std::size_t>(j) - 1])];
    const Vec3& image = images[static_cast<std::size_t>(j)];
    const double denom = image[face.axis] - from[face.axis];
    if (std::abs(denom) < kFaceEps) return std::nullopt;
    const double t = (face.coord - from[face.axis]) / denom;
    if (t <= kSegmentEps || t >= 1.0 - kSegmentEps) return std::nullopt;
    Vec3 q = from + t * (image - from);
    q[face.axis] = face.coord;
    if (!on_face(face, q)) return std::nullopt;
    if (!visible(grid, from, q)) return std::nullopt;
    path.reflection_points.push_back(q);
    from = q;
  }
  if (!visible(grid, from, source)) return std::nullopt;
  return path;
}

}  // namespace

void Scenario::validate() const {
  if (!(resolution > 0.0)) throw ScenarioError("resolution", "must be > 0");
  for (std::size_t i = 0; i < room.size(); ++i) {
    if ((room[i].max.array() < room[i].min.array()).any() || !room[i].min.allFinite() ||
        !room[i].max.allFinite()) {
      throw ScenarioError(indexed("room", i), "max must not be below min");
    }
  }
  const Aabb b = map_bounds();
  if (b.degenerate()) throw ScenarioError("bounds", "map bounds have zero volume");
  if (!in_interior(mic)) throw ScenarioError("mic", "must lie inside the room interior");
  if (trajectory.empty()) throw ScenarioError("trajectory", "needs at least one waypoint");
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& w = trajectory[i];
    if (i > 0 && !(w.time > trajectory[i - 1].time)) {
      throw ScenarioError(indexed("trajectory", i) + ".time", "must increase strictly");
    }
    if (!in_interior(w.position)) {
      throw ScenarioError(indexed("trajectory", i) + ".position",
                          "must lie inside the room interior");
    }
  }
  if (!(frame_interval > 0.0)) throw ScenarioError("frame_interval", "must be > 0");
  if (duration && !(*duration >= 0.0)) throw ScenarioError("duration", "must be >= 0");
  if (!(frequency > 0.0)) throw ScenarioError("frequency", "must be > 0");
  if (!(source_energy > 0.0)) throw ScenarioError("source_energy", "must be > 0");
  if (!(noise_angle_std >= 0.0)) throw ScenarioError("noise_angle_std", "must be >= 0");
  if (max_image_order < 0) throw ScenarioError("max_image_order", "must be >= 0");
  if (clutter_count < 0) throw ScenarioError("clutter_count", "must be >= 0");
  if (!(absorption >= 0.0 && absorption < 1.0)) {
    throw ScenarioError("absorption", "must lie in [0, 1)");
  }
  if (attenuation.empty()) throw ScenarioError("attenuation", "needs at least one entry");
  for (const auto& [f, a] : attenuation) {
    if (!(f > 0.0) || !(a >= 0.0)) {
      throw ScenarioError("attenuation", "entries need frequency > 0 and alpha >= 0");
    }
  }
}

Aabb Scenario::map_bounds() const {
  if (bounds) return *bounds;
  if (room.empty()) return {};
  Aabb b = room.front();
  for (const auto& box : room) b = b.merged(box);
  return b;
}

bool Scenario::in_interior(const Vec3& p) const {
  return map_bounds().contains(p) && !inside_any(room, p);
}

Vec3 Scenario::source_at(double time) const {
  if (trajectory.empty()) return Vec3::Zero();
  if (time <= trajectory.front().time) return trajectory.front().position;
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const auto& a = trajectory[i - 1];
    const auto& b = trajectory[i];
    if (time <= b.time) {
      const double w = (time - a.time) / (b.time - a.time);
      return a.position + w * (b.position - a.position);
    }
  }
  return trajectory.back().position;
}

bool Scenario::emitting_at(double time) const {
  bool emitting = !trajectory.empty() && trajectory.front().emitting;
  for (const auto& w : trajectory) {
    if (w.time <= time + 1e-12) emitting = w.emitting;
  }
  return emitting;
}

std::vector<double> Scenario::frame_times() const {
  std::vector<double> times;
  if (trajectory.empty()) return times;
  const double start = trajectory.front().time;
  const double span = duration.value_or(trajectory.back().time - start);
  for (long i = 0;; ++i) {
    const double t = start + static_cast<double>(i) * frame_interval;
    if (t > start + span + 1e-9) break;
    times.push_back(t);
  }
  return times;
}

OccupancyGrid build_grid(const Scenario& scenario) {
  OccupancyGrid grid = OccupancyGrid::covering(scenario.map_bounds(), scenario.resolution);
  for (const auto& box : scenario.room) grid.rasterize_box(box);
  return grid;
}

std::vector<Aabb> box_room_shell(const Aabb& interior, double thickness) {
  const Vec3 lo = interior.min - Vec3::Constant(thickness);
  const Vec3 hi = interior.max + Vec3::Constant(thickness);
  std::vector<Aabb> shell;
  for (int axis = 0; axis < 3; ++axis) {
    Aabb low{lo, hi};
    low.max[axis] = interior.min[axis];
    Aabb high{lo, hi};
    high.min[axis] = interior.max[axis];
    shell.push_back(low);
    shell.push_back(high);
  }
  return shell;
}

std::vector<Face> room_faces(std::span<const Aabb> room) {
  std::vector<Face> faces;
  for (const auto& box : room) {
    if (box.degenerate()) continue;
    for (int axis = 0; axis < 3; ++axis) {
      for (int outward : {-1, 1}) {
        Face f;
        f.axis = axis;
        f.outward = outward;
        f.coord = outward > 0 ? box.max[axis] : box.min[axis];
        f.rect = box;
        f.rect.min[axis] = f.rect.max[axis] = f.coord;
        faces.push_back(f);
      }
    }
  }
  return faces;
}

std::vector<ImageSource> image_sources(std::span<const Aabb> room, const Vec3& source,
                                       int max_order) {
  const auto faces = room_faces(room);
  std::vector<ImageSource> out;
  for (const auto& node : image_tree(faces, source, max_order)) {
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const ImageSource& s) {
      return (s.position - node.position).norm() < 1e-6;
    });
    if (!duplicate) out.push_back({node.position, static_cast<int>(node.faces.size())});
  }
  return out;
}

bool visible(const OccupancyGrid& grid, const Vec3& a, const Vec3& b) {
  const Vec3 delta = b - a;
  const double dist = delta.norm();
  if (!(dist > 0.0)) return true;
  const Vec3 dir = delta / dist;
  bool clear = true;
  visit_voxels(grid, a, dir, dist, [&](const VoxelKey& key, double entry) {
    if (entry >= dist - kSegmentEps) return false;
    if (!grid.occupied(key)) return true;
    const Aabb box = grid.voxel_box(key);
    if (box.contains(a, kFaceEps) || box.contains(b, kFaceEps)) return true;
    clear = false;
    return false;
  });
  return clear;
}

std::vector<PropagationPath> propagation_paths(const Scenario& scenario,
                                               const OccupancyGrid& grid, const Vec3& source) {
  const auto faces = room_faces(scenario.room);
  std::vector<PropagationPath> paths;
  std::vector<Vec3> arrivals;
  for (const auto& node : image_tree(faces, source, scenario.max_image_order)) {
    auto path = unfold(faces, grid, node, source, scenario.mic);
    if (!path) continue;
    const Vec3 last = path->reflection_points.empty() ? source : path->reflection_points.front();
    const Vec3 arrival = (scenario.mic - last).normalized();
    const bool seen = std::any_of(arrivals.begin(), arrivals.end(),
                                  [&](const Vec3& v) { return (v - arrival).norm() < 1e-9; });
    if (seen) continue;
    arrivals.push_back(arrival);
    paths.push_back(std::move(*path));
  }
  return paths;
}

Vec3 rotate_off_axis(const Vec3& v, const Vec3& axis_hint, double angle) {
  Vec3 axis = axis_hint - axis_hint.dot(v) * v;
  if (axis.norm() < 1e-12) axis = v.unitOrthogonal();
  axis.normalize();
  // Axis is orthogonal to v, so Rodrigues' formula loses its last term.
  return (v * std::cos(angle) + axis.cross(v) * std::sin(angle)).normalized();
}

ObservationFrame generate_frame(const Scenario& scenario, const OccupancyGrid& grid,
                                double time, Rng& rng) {
  ObservationFrame frame;
  frame.time = time;
  frame.ground_truth_source = scenario.source_at(time);
  frame.emitting = scenario.emitting_at(time);
  if (!frame.emitting) return frame;

  TraceConfig physics;
  physics.attenuation_table = scenario.attenuation;
  const double alpha = attenuation_coeff(physics, scenario.frequency);

  frame.paths = propagation_paths(scenario, grid, frame.ground_truth_source);
  for (const auto& path : frame.paths) {
    const Vec3 last =
        path.reflection_points.empty() ? frame.ground_truth_source : path.reflection_points.front();
    IncomingSignal s;
    s.direction = (scenario.mic - last).normalized();
    s.frequency = scenario.frequency;
    s.energy = scenario.source_energy * std::exp(-alpha * path.length) *
               std::pow(1.0 - scenario.absorption, path.order);
    frame.signals.push_back(s);
  }

  std::normal_distribution<double> n01(0.0, 1.0);
  const auto random_direction = [&] {
    Vec3 v;
    do {
      v = Vec3(n01(rng), n01(rng), n01(rng));
    } while (v.norm() < 1e-12);
    return v.normalized();
  };

  // Spurious arrivals carry the weakest real signal's energy.
  double clutter_energy = scenario.source_energy;
  for (const auto& s : frame.signals) clutter_energy = std::min(clutter_energy, s.energy);
  for (int c = 0; c < scenario.clutter_count; ++c) {
    frame.signals.push_back({random_direction(), scenario.frequency, clutter_energy});
  }

  if (scenario.noise_angle_std > 0.0) {
    std::normal_distribution<double> tilt(0.0, scenario.noise_angle_std);
    for (auto& s : frame.signals) {
      const Vec3 hint = random_direction();
      s.direction = rotate_off_axis(s.direction, hint, std::abs(tilt(rng)));
    }
  }
  return frame;
}

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

Scenario seven_by_seven(std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.room = box_room_shell(Aabb(Vec3(0, 0, 0), Vec3(7, 7, 3)), 0.1);
  s.resolution = 0.1;
  s.source_energy = 850.0;
  return s;
}

}  // namespace

Scenario static_room_scenario() {
  Scenario s = seven_by_seven("static_room");
  s.mic = Vec3(2.0, 2.0, 1.0);
  s.trajectory = {{0.0, Vec3(4.0, 4.0, 2.0), true}};
  s.max_image_order = 1;
  s.duration = 2.0;
  s.rng_seed = 7;
  return s;
}

Scenario occluded_room_scenario() {
  Scenario s = seven_by_seven("occluded_room");
  s.room.push_back(Aabb(Vec3(3.3, 2.6, 0.0), Vec3(3.7, 4.4, 1.8)));
  s.mic = Vec3(2.0, 3.3, 1.0);
  s.trajectory = {{0.0, Vec3(5.0, 3.8, 1.4), true}};
  s.max_image_order = 1;
  s.noise_angle_std = 5.0 * kDegree;
  s.rng_seed = 11;
  return s;
}

Scenario moving_intermittent_scenario() {
  Scenario s = seven_by_seven("moving_intermittent");
  s.room.push_back(Aabb(Vec3(1.6, 3.4, 0.0), Vec3(2.2, 3.8, 1.6)));
  s.mic = Vec3(3.5, 1.5, 1.0);
  s.trajectory = {
      {0.0, Vec3(1.5, 5.5, 1.2), true},
      {8.0, Vec3(3.5, 5.8, 1.2), false},
      {14.0, Vec3(5.0, 5.5, 1.2), true},
      {20.0, Vec3(5.5, 4.5, 1.2), true},
  };
  s.max_image_order = 2;
  s.noise_angle_std = 5.0 * kDegree;
  s.rng_seed = 23;
  return s;
}

Scenario silent_room_scenario() {
  Scenario s = seven_by_seven("silent_room");
  s.mic = Vec3(2.0, 2.0, 1.0);
  s.trajectory = {{0.0, Vec3(4.0, 4.0, 2.0), false}, {2.0, Vec3(5.0, 4.0, 2.0), false}};
  s.rng_seed = 3;
  return s;
}

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "static_room") return static_room_scenario();
  if (name == "occluded_room") return occluded_room_scenario();
  if (name == "moving_intermittent") return moving_intermittent_scenario();
  if (name == "silent_room") return silent_room_scenario();
  return std::nullopt;
}

std::vector<std::string> builtin_scenario_names() {
  return {"static_room", "occluded_room", "moving_intermittent", "silent_room"};
}

}  // namespace echoloc
