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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "echoloc/errors.hpp"
#include "echoloc/forward_sim.hpp"
#include "echoloc/localizer.hpp"
#include "support/oracles.hpp"

namespace echoloc {
namespace {

Scenario empty_box(const Vec3& mic, const Vec3& source) {
  Scenario s;
  s.name = "box";
  s.room = box_room_shell(Aabb(Vec3(0, 0, 0), Vec3(7, 7, 3)), 0.1);
  s.mic = mic;
  s.trajectory = {{0.0, source, true}};
  s.max_image_order = 0;
  return s;
}

TEST(BoxRoomShell, VoxelCount) {
  Scenario s = empty_box(Vec3(1, 1, 1), Vec3(2, 2, 2));
  const OccupancyGrid g = build_grid(s);
  // 72 x 72 x 32 outer voxels minus the 70 x 70 x 30 interior.
  EXPECT_EQ(g.occupied_count(), 72u * 72 * 32 - 70u * 70 * 30);
  EXPECT_EQ(g.occupied_count(), 18888u);
  EXPECT_FALSE(g.occupied(g.key_of(Vec3(3.5, 3.5, 1.5))));
  EXPECT_TRUE(g.occupied(g.key_of(Vec3(-0.05, 3.5, 1.5))));
}

TEST(ImageSources, Examples) {
  const auto room = box_room_shell(Aabb(Vec3(0, 0, 0), Vec3(7, 7, 3)), 0.1);
  const Vec3 src(1, 1, 1);
  const auto zero = image_sources(room, src, 0);
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0].position, src);
  EXPECT_EQ(zero[0].reflection_count, 0);

  const auto first = image_sources(room, src, 1);
  EXPECT_EQ(first.size(), 7u);
  bool ceiling = false;
  for (const auto& im : first) {
    if ((im.position - Vec3(1, 1, 5)).norm() < 1e-12) ceiling = im.reflection_count == 1;
  }
  EXPECT_TRUE(ceiling);
}

TEST(ImageSourcesProperty, MirrorsOfParentsWithoutDuplicates) {
  const auto room = box_room_shell(Aabb(Vec3(0, 0, 0), Vec3(7, 7, 3)), 0.1);
  const auto faces = room_faces(room);
  const Vec3 src(2.5, 4.0, 1.2);
  const auto images = image_sources(room, src, 3);
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t j = i + 1; j < images.size(); ++j)
      EXPECT_GT((images[i].position - images[j].position).norm(), 1e-6);
    if (images[i].reflection_count == 0) continue;
    // Some face mirrors an image one order lower onto this one.
    bool found = false;
    for (const auto& f : faces) {
      Vec3 back = images[i].position;
      back[f.axis] = 2 * f.coord - back[f.axis];
      for (const auto& p : images)
        if (p.reflection_count == images[i].reflection_count - 1 &&
            (p.position - back).norm() < 1e-9)
          found = true;
    }
    EXPECT_TRUE(found) << "image " << i;
  }
}

TEST(Visible, Examples) {
  Scenario s = empty_box(Vec3(1, 1, 1), Vec3(2, 2, 2));
  s.room.push_back(Aabb(Vec3(3, 3, 0), Vec3(4, 4, 2)));
  const OccupancyGrid g = build_grid(s);
  EXPECT_TRUE(visible(g, Vec3(1, 1, 1), Vec3(6, 1.5, 2)));
  EXPECT_FALSE(visible(g, Vec3(2, 2, 1), Vec3(5, 5, 1)));
  // Reflection points on the floor are visible from the room side.
  EXPECT_TRUE(visible(g, Vec3(1, 1, 1), Vec3(1.5, 2.0, 0.0)));
}

// Property: visibility matches a fixed-step march that ignores voxels
// touching either endpoint.
TEST(VisibleProperty, MatchesMarcher) {
  Scenario s = empty_box(Vec3(1, 1, 1), Vec3(2, 2, 2));
  s.room.push_back(Aabb(Vec3(3, 3, 0), Vec3(4, 4, 2)));
  s.room.push_back(Aabb(Vec3(1.5, 5, 1), Vec3(2.5, 6, 2.5)));
  const OccupancyGrid g = build_grid(s);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double res = g.resolution();
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Vec3 a(0.2 + 6.6 * u(rng), 0.2 + 6.6 * u(rng), 0.2 + 2.6 * u(rng));
    const Vec3 b(0.2 + 6.6 * u(rng), 0.2 + 6.6 * u(rng), 0.2 + 2.6 * u(rng));
    if (g.occupied(g.key_of(a)) || g.occupied(g.key_of(b))) continue;
    const double len = (b - a).norm();
    const Vec3 d = (b - a) / len;
    bool blocked = false;
    bool near_miss = false;
    const double step = res / 200;
    for (double t = 0; t <= len; t += step) {
      const Vec3 p = a + t * d;
      if (!g.occupied(g.key_of(p))) continue;
      // A sub-step sliver through a voxel corner is ambiguous for the marcher.
      if (oracle::chord_length(g, g.key_of(p), a, d) < 2 * step) near_miss = true;
      blocked = true;
      break;
    }
    if (near_miss) continue;
    EXPECT_EQ(visible(g, a, b), !blocked) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 350);
}

TEST(GenerateFrame, DirectPathOnly) {
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(4, 5, 2));
  const OccupancyGrid g = build_grid(s);
  Rng rng(1);
  const auto f = generate_frame(s, g, 0.0, rng);
  ASSERT_EQ(f.signals.size(), 1u);
  const Vec3 to_source = (Vec3(4, 5, 2) - Vec3(2, 2, 1)).normalized();
  EXPECT_LT((-f.signals[0].direction - to_source).norm(), 1e-9);
  const double l = (Vec3(4, 5, 2) - Vec3(2, 2, 1)).norm();
  TraceConfig tc;
  const double alpha = attenuation_coeff(tc, s.frequency);
  EXPECT_NEAR(f.signals[0].energy, s.source_energy * std::exp(-alpha * l), 1e-12);
  EXPECT_EQ(f.ground_truth_source, Vec3(4, 5, 2));
  EXPECT_TRUE(f.emitting);
}

TEST(GenerateFrame, SilentFrameRecordsGroundTruth) {
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(4, 5, 2));
  s.trajectory = {{0.0, Vec3(4, 5, 2), false}, {2.0, Vec3(5, 5, 2), true}};
  const OccupancyGrid g = build_grid(s);
  Rng rng(1);
  const auto f = generate_frame(s, g, 1.0, rng);
  EXPECT_TRUE(f.signals.empty());
  EXPECT_FALSE(f.emitting);
  EXPECT_LT((f.ground_truth_source - Vec3(4.5, 5, 2)).norm(), 1e-12);
}

TEST(GenerateFrame, ClutterUsesWeakestEnergy) {
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(4, 5, 2));
  s.max_image_order = 1;
  s.clutter_count = 4;
  const OccupancyGrid g = build_grid(s);
  Rng rng(2);
  const auto f = generate_frame(s, g, 0.0, rng);
  ASSERT_EQ(f.signals.size(), f.paths.size() + 4);
  double weakest = INFINITY;
  for (std::size_t i = 0; i < f.paths.size(); ++i) weakest = std::min(weakest, f.signals[i].energy);
  for (std::size_t i = f.paths.size(); i < f.signals.size(); ++i) {
    EXPECT_EQ(f.signals[i].energy, weakest);
    EXPECT_NEAR(f.signals[i].direction.norm(), 1.0, 1e-12);
  }
}

class BuiltinFrames : public ::testing::TestWithParam<std::string> {};

TEST_P(BuiltinFrames, EnergyDualityDirectionsAndValidity) {
  Scenario s = *builtin_scenario(GetParam());
  s.noise_angle_std = 0.0;
  s.max_image_order = 2;
  const OccupancyGrid g = build_grid(s);
  const auto faces = room_faces(s.room);
  TraceConfig tc;
  tc.mic_position = s.mic;
  tc.absorption = s.absorption;
  tc.attenuation_table = s.attenuation;
  const double alpha = attenuation_coeff(tc, s.frequency);
  int emitted = 0;
  for (const double t : s.frame_times()) {
    Rng rng(4);
    const auto f = generate_frame(s, g, t, rng);
    ASSERT_EQ(f.signals.size(), f.paths.size());
    for (std::size_t i = 0; i < f.paths.size(); ++i) {
      const auto& path = f.paths[i];
      const auto& sig = f.signals[i];
      ++emitted;
      EXPECT_NEAR(sig.direction.norm(), 1.0, 1e-12);

      // Forward decay undone by the inverse energy model.
      AcousticRay r;
      r.initial_energy = sig.energy;
      double e = energy_at(r, path.length, alpha);
      for (int k = 0; k < path.order; ++k) e /= (1.0 - s.absorption);
      EXPECT_NEAR(e / s.source_energy, 1.0, 1e-9);

      // The inverse order-0 ray heads at the source or the first bounce.
      const AcousticRay r0 = init_ray(sig, tc);
      const Vec3 target = path.order == 0 ? f.ground_truth_source : path.reflection_points.front();
      const double along = (target - r0.origin).dot(r0.direction);
      EXPECT_GT(along, 0.0);
      EXPECT_LT((r0.at(along) - target).norm(), g.resolution());

      // Reflection points lie on real faces and every leg is clear.
      Vec3 prev = s.mic;
      for (const auto& q : path.reflection_points) {
        bool on_face = false;
        for (const auto& face : faces)
          on_face = on_face || (std::abs(q[face.axis] - face.coord) < 1e-9 &&
                                face.rect.contains(q, 1e-9));
        EXPECT_TRUE(on_face);
        EXPECT_TRUE(visible(g, prev, q));
        prev = q;
      }
      EXPECT_TRUE(visible(g, prev, f.ground_truth_source));
      EXPECT_EQ(static_cast<int>(path.reflection_points.size()), path.order);
    }
  }
  EXPECT_GT(emitted, 0);
}

INSTANTIATE_TEST_SUITE_P(Scenes, BuiltinFrames,
                         ::testing::Values("static_room", "occluded_room", "moving_intermittent"));

TEST(GenerateFrame, OcclusionRemovesTheDirectPath) {
  Scenario s = occluded_room_scenario();
  s.noise_angle_std = 0.0;
  const OccupancyGrid g = build_grid(s);
  Rng rng(1);
  const auto f = generate_frame(s, g, 0.0, rng);
  EXPECT_FALSE(f.paths.empty());
  for (const auto& p : f.paths) EXPECT_GT(p.order, 0);
}

TEST(GenerateFrameProperty, NoiseAngleIsHalfNormal) {
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(4, 5, 2));
  const double sigma = 5.0 * std::numbers::pi / 180;
  s.noise_angle_std = sigma;
  const OccupancyGrid g = build_grid(s);
  const Vec3 clean = -(Vec3(4, 5, 2) - Vec3(2, 2, 1)).normalized();
  Rng rng(9);
  const int n = 20000;
  double sum = 0.0;
  Vec3 axis_sum = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const auto f = generate_frame(s, g, 0.0, rng);
    const Vec3 d = f.signals[0].direction;
    EXPECT_NEAR(d.norm(), 1.0, 1e-12);
    sum += oracle::angle_between(d, clean);
    axis_sum += (d - clean.dot(d) * clean);
  }
  const double mean = sum / n;
  const double se = sigma * std::sqrt(1.0 - 2.0 / std::numbers::pi) / std::sqrt(n);
  EXPECT_NEAR(mean, sigma * std::sqrt(2.0 / std::numbers::pi), 3 * se);
  // Deviations have no preferred direction.
  EXPECT_LT((axis_sum / n).norm(), 5 * sigma / std::sqrt(n));
}

TEST(RotateOffAxis, AngleAndNorm) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = oracle::random_unit(rng);
    const Vec3 hint = oracle::random_unit(rng);
    const double angle = 0.01 + 3.0 * i / 1000;
    const Vec3 r = rotate_off_axis(v, hint, angle);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_NEAR(oracle::angle_between(r, v), angle, 1e-9);
  }
}

TEST(GenerateFrame, NoiselessRoundTripLocalizes) {
  const Scenario s = static_room_scenario();
  Scenario quiet = s;
  quiet.noise_angle_std = 0.0;
  const OccupancyGrid g = build_grid(quiet);
  Rng rng(1);
  const auto f = generate_frame(quiet, g, 0.0, rng);
  TraceConfig tc;
  tc.mic_position = quiet.mic;
  tc.absorption = quiet.absorption;
  tc.attenuation_table = quiet.attenuation;
  const auto paths = trace_all(f.signals, g, tc);
  LocalizerConfig lc;
  lc.rng_seed = 3;
  const auto e = localize(paths, g.bounds(), lc);
  EXPECT_TRUE(e.converged);
  EXPECT_LT((e.mean - f.ground_truth_source).norm(), 0.3);
}

TEST(Scenario, TrajectoryInterpolation) {
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(1, 1, 1));
  s.trajectory = {{0.0, Vec3(1, 1, 1), true}, {4.0, Vec3(5, 1, 1), false}, {6.0, Vec3(5, 3, 1), true}};
  EXPECT_LT((s.source_at(1.0) - Vec3(2, 1, 1)).norm(), 1e-12);
  EXPECT_LT((s.source_at(5.0) - Vec3(5, 2, 1)).norm(), 1e-12);
  EXPECT_EQ(s.source_at(-1.0), Vec3(1, 1, 1));
  EXPECT_EQ(s.source_at(9.0), Vec3(5, 3, 1));
  EXPECT_TRUE(s.emitting_at(3.9));
  EXPECT_FALSE(s.emitting_at(4.0));
  EXPECT_FALSE(s.emitting_at(5.9));
  EXPECT_TRUE(s.emitting_at(6.0));
  const auto times = s.frame_times();
  ASSERT_EQ(times.size(), 13u);
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_NEAR(times.back(), 6.0, 1e-12);
}

TEST(Scenario, ValidationNamesTheField) {
  auto field_of = [](const Scenario& s) {
    try {
      s.validate();
    } catch (const ScenarioError& e) {
      return e.field();
    }
    return std::string("ok");
  };
  Scenario s = empty_box(Vec3(2, 2, 1), Vec3(4, 4, 1));
  EXPECT_EQ(field_of(s), "ok");
  Scenario bad = s;
  bad.mic = Vec3(-0.05, 2, 1);
  EXPECT_EQ(field_of(bad), "mic");
  bad = s;
  bad.trajectory[0].position = Vec3(8, 2, 1);
  EXPECT_EQ(field_of(bad), "trajectory[0].position");
  bad = s;
  bad.absorption = 1.0;
  EXPECT_EQ(field_of(bad), "absorption");
  bad = s;
  bad.frame_interval = 0.0;
  EXPECT_EQ(field_of(bad), "frame_interval");
}

TEST(Builtins, AllValidAndNamed) {
  for (const auto& name : builtin_scenario_names()) {
    const auto s = builtin_scenario(name);
    ASSERT_TRUE(s) << name;
    EXPECT_EQ(s->name, name);
    EXPECT_NO_THROW(s->validate());
  }
  EXPECT_FALSE(builtin_scenario("nope"));
  // The static scene keeps its source exactly 3 m from the array.
  const auto st = static_room_scenario();
  EXPECT_NEAR((st.trajectory[0].position - st.mic).norm(), 3.0, 1e-12);
}

}  // namespace
}  // namespace echoloc
