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
#include <random>
#include <sstream>

#include "echoloc/errors.hpp"
#include "echoloc/forward_sim.hpp"
#include "echoloc/ray_tracer.hpp"
#include "support/oracles.hpp"

namespace echoloc {
namespace {

const Aabb kInterior(Vec3(0, 0, 0), Vec3(7, 7, 3));

OccupancyGrid box_room(double res = 0.1) {
  const auto shell = box_room_shell(kInterior, res);
  Aabb bounds = shell.front();
  for (const auto& b : shell) bounds = bounds.merged(b);
  OccupancyGrid g = OccupancyGrid::covering(bounds, res);
  for (const auto& b : shell) g.rasterize_box(b);
  return g;
}

TraceConfig lossless(const Vec3& mic) {
  TraceConfig c;
  c.mic_position = mic;
  c.absorption = 0.0;
  c.attenuation_table = {{1000.0, 0.0}};
  return c;
}

TEST(InitRay, NegatesDirection) {
  TraceConfig c;
  c.mic_position = Vec3(0, 0, 0);
  const auto r = init_ray({Vec3(0, 0, -1), 4000, 1.0}, c);
  EXPECT_EQ(r.origin, Vec3(0, 0, 0));
  EXPECT_EQ(r.direction, Vec3(0, 0, 1));
  EXPECT_EQ(r.order, 0);
  EXPECT_EQ(r.initial_energy, 1.0);
  EXPECT_EQ(init_ray({Vec3(1, 0, 0), 4000, 1.0}, c).direction, Vec3(-1, 0, 0));
  c.mic_position = Vec3(2, 3, 1);
  const auto r2 = init_ray({Vec3(0, 1, 0), 4000, 1.0}, c);
  EXPECT_EQ(r2.origin, Vec3(2, 3, 1));
  EXPECT_EQ(r2.direction, Vec3(0, -1, 0));
}

TEST(IncomingSignal, ValidateRejectsBadFields) {
  EXPECT_THROW((IncomingSignal{Vec3(1, 1, 0), 4000, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((IncomingSignal{Vec3(1, 0, 0), 0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((IncomingSignal{Vec3(1, 0, 0), 4000, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((IncomingSignal{Vec3(1, 0, 0), 4000, 1}.validate()));
}

TEST(EnergyAt, ClosedForms) {
  AcousticRay r;
  r.initial_energy = 1.0;
  EXPECT_EQ(energy_at(r, 12.0, 0.0), 1.0);
  r.initial_energy = 2.0;
  EXPECT_NEAR(energy_at(r, 10.0, 0.1), 5.436563657, 1e-9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double e0 = 0.1 + 100 * u(rng);
    const double a = 0.05 * u(rng);
    const double l = 20 * u(rng);
    r.initial_energy = e0 * std::exp(-a * l);
    EXPECT_NEAR(energy_at(r, l, a) / e0, 1.0, 1e-12);
  }
}

TEST(EnergyAt, StrictlyIncreasingWithPositiveAlpha) {
  AcousticRay r;
  r.initial_energy = 3.0;
  double prev = energy_at(r, 0.0, 0.01);
  for (double l = 0.5; l < 20; l += 0.5) {
    const double e = energy_at(r, l, 0.01);
    EXPECT_GT(e, prev);
    prev = e;
  }
}

TEST(SpecularDirection, Examples) {
  EXPECT_EQ(specular_direction(Vec3(0, 0, -1), Vec3(0, 0, 1)), Vec3(0, 0, 1));
  const double s = std::sqrt(0.5);
  EXPECT_LT((specular_direction(Vec3(s, 0, -s), Vec3(0, 0, 1)) - Vec3(s, 0, s)).norm(), 1e-15);
  EXPECT_LT((specular_direction(Vec3(0.6, 0, -0.8), Vec3(0, 0, 1)) - Vec3(0.6, 0, 0.8)).norm(),
            1e-15);
  EXPECT_THROW(specular_direction(Vec3(0, 0, 1), Vec3(0, 0, 1)), OrientationError);
  EXPECT_THROW(specular_direction(Vec3(1, 0, 0), Vec3(0, 0, 1)), OrientationError);
}

TEST(SpecularDirectionProperty, InvolutionAndNormPreservation) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 n = oracle::random_unit(rng);
    Vec3 d = oracle::random_unit(rng);
    if (d.dot(n) > 0) d = -d;
    if (d.dot(n) == 0.0) continue;
    const Vec3 r = specular_direction(d, n);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    // The reflected ray leaves along +n, so mirror it back with -n.
    EXPECT_LT((specular_direction(r, -n) - d).norm(), 1e-12);
    // Incidence equals reflection angle.
    EXPECT_NEAR(r.dot(n), -d.dot(n), 1e-12);
  }
}

TEST(Reflect, EnergyClosedForms) {
  TraceConfig c;
  c.absorption = 0.1;
  AcousticRay r;
  r.direction = Vec3(0, 0, -1);
  r.initial_energy = 0.9;
  HitRecord hit;
  hit.hit_length = 2.0;
  hit.hit_point = Vec3(0, 0, -2);
  hit.normal = Vec3(0, 0, 1);
  auto next = reflect(r, hit, c, 0.0, 0.05);
  EXPECT_NEAR(next.initial_energy, 1.0, 1e-15);
  EXPECT_EQ(next.order, 1);
  EXPECT_EQ(next.direction, Vec3(0, 0, 1));
  EXPECT_LT((next.origin - Vec3(0, 0, -1.95)).norm(), 1e-15);

  c.absorption = 0.0;
  r.initial_energy = 1.0;
  EXPECT_EQ(reflect(r, hit, c, 0.0, 0.05).initial_energy, 1.0);

  c.absorption = 0.2;
  hit.hit_length = 3.0;
  // exp(0.03) / 0.8
  EXPECT_NEAR(reflect(r, hit, c, 0.01, 0.05).initial_energy, 1.2880681674418961, 1e-13);
}

TEST(TraceConfig, ValidateRejectsBadValues) {
  TraceConfig c;
  c.absorption = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TraceConfig{};
  c.energy_ceiling = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TraceConfig{};
  c.max_order = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TraceConfig{};
  c.attenuation_table = {{1000, -0.1}};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AttenuationCoeff, PiecewiseLinearAndClamped) {
  TraceConfig c;
  c.attenuation_table = {{1000, 0.001}, {4000, 0.004}};
  EXPECT_NEAR(attenuation_coeff(c, 2500), 0.0025, 1e-15);
  EXPECT_EQ(attenuation_coeff(c, 100), 0.001);
  EXPECT_EQ(attenuation_coeff(c, 9000), 0.004);
  c.attenuation_table = {{2000, 0.007}};
  EXPECT_EQ(attenuation_coeff(c, 10), 0.007);
  EXPECT_EQ(attenuation_coeff(c, 1e5), 0.007);
  c.attenuation_table.clear();
  EXPECT_THROW(attenuation_coeff(c, 1000), ConfigError);
  EXPECT_NEAR(attenuation_coeff(TraceConfig{}, 4000), 0.0049, 1e-15);
}

TEST(TracePath, EmptyGridSingleRayToBoundsExit) {
  const OccupancyGrid g = OccupancyGrid::covering(Aabb(Vec3(0, 0, 0), Vec3(4, 4, 4)), 0.1);
  TraceConfig c;
  c.mic_position = Vec3(1, 2, 2);
  const auto path = trace_path({Vec3(-1, 0, 0), 4000, 1.0}, g, c);
  ASSERT_EQ(path.rays.size(), 1u);
  EXPECT_NEAR(path.rays[0].length, 3.0, 1e-12);
  EXPECT_EQ(path.termination, Termination::kEscaped);
}

TEST(TracePath, CeilingFloorBounces) {
  const OccupancyGrid g = box_room();
  TraceConfig c = lossless(Vec3(3.5, 3.5, 1.5));
  const auto path = trace_path({Vec3(0, 0, -1), 4000, 1.0}, g, c);
  ASSERT_EQ(path.rays.size(), 5u);
  EXPECT_EQ(path.termination, Termination::kMaxOrder);
  const double res = g.resolution();
  EXPECT_NEAR(path.rays[0].length, 1.5, 2 * res);
  for (std::size_t k = 0; k < path.rays.size(); ++k) {
    EXPECT_EQ(path.rays[k].order, static_cast<int>(k));
    EXPECT_NEAR(path.rays[k].direction.z(), k % 2 == 0 ? 1.0 : -1.0, 1e-12);
    if (k > 0) EXPECT_NEAR(path.rays[k].length, 3.0, 2 * res);
    EXPECT_NEAR(path.rays[k].end().z(), k % 2 == 0 ? 3.0 : 0.0, 2 * res);
  }
}

TEST(TracePath, CeilingCutoffLeavesOneRay) {
  const OccupancyGrid g = box_room();
  TraceConfig c;
  c.mic_position = Vec3(3.5, 3.5, 1.5);
  const double alpha = attenuation_coeff(c, 4000);
  const double first_bounce = 1.0 * std::exp(alpha * 1.5) / (1.0 - c.absorption);
  c.energy_ceiling = 0.999 * first_bounce;
  const auto path = trace_path({Vec3(0, 0, -1), 4000, 1.0}, g, c);
  EXPECT_EQ(path.rays.size(), 1u);
  EXPECT_EQ(path.termination, Termination::kEnergyCeiling);
}

TEST(TracePath, OrderCapWinsOverCeiling) {
  const OccupancyGrid g = box_room();
  TraceConfig c;
  c.mic_position = Vec3(3.5, 3.5, 1.5);
  c.max_order = 0;
  c.energy_ceiling = 1e-3;
  const auto path = trace_path({Vec3(0, 0, -1), 4000, 1.0}, g, c);
  EXPECT_EQ(path.rays.size(), 1u);
  EXPECT_EQ(path.termination, Termination::kMaxOrder);
}

// Analytic specular bounces inside the interior box, exact planes.
std::vector<Vec3> analytic_hits(Vec3 p, Vec3 d, int count, std::vector<int>& axes) {
  std::vector<Vec3> hits;
  for (int k = 0; k < count; ++k) {
    double best = INFINITY;
    int axis = -1;
    for (int a = 0; a < 3; ++a) {
      if (d[a] == 0.0) continue;
      const double wall = d[a] > 0 ? kInterior.max[a] : kInterior.min[a];
      const double t = (wall - p[a]) / d[a];
      if (t < best) {
        best = t;
        axis = a;
      }
    }
    p = p + best * d;
    hits.push_back(p);
    axes.push_back(axis);
    d[axis] = -d[axis];
  }
  return hits;
}

// Distance from `p` to the nearest interior edge other than along `axis`.
double edge_clearance(const Vec3& p, int axis) {
  double c = INFINITY;
  for (int a = 0; a < 3; ++a) {
    if (a == axis) continue;
    c = std::min({c, p[a] - kInterior.min[a], kInterior.max[a] - p[a]});
  }
  return c;
}

// Bounces whose 5x5x5 neighborhood reaches a room edge fit a tilted normal,
// so the comparison stops at the first bounce within that distance of one.
TEST(TracePathProperty, MatchesPlaneMirrorUnfolding) {
  const OccupancyGrid g = box_room();
  const double res = g.resolution();
  const double reach = (2 + 1) * res;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 mic(1.0 + 5.0 * u(rng), 1.0 + 5.0 * u(rng), 0.8 + 1.4 * u(rng));
    const Vec3 d = oracle::random_unit(rng);
    const auto path = trace_path({-d, 4000, 1.0}, g, lossless(mic));
    std::vector<int> axes;
    const auto expected = analytic_hits(mic, d, static_cast<int>(path.rays.size()), axes);
    ASSERT_GE(path.rays.size(), 1u);
    for (std::size_t k = 0; k < path.rays.size(); ++k) {
      if (edge_clearance(expected[k], axes[k]) < reach) break;
      EXPECT_LT((path.rays[k].end() - expected[k]).norm(), 2.0 * res * (k + 1))
          << "trial " << trial << " bounce " << k;
      ++compared;
    }
  }
  EXPECT_GT(compared, 250);
}

TEST(TracePathProperty, ContinuityMonotonicityTermination) {
  const Scenario s = occluded_room_scenario();
  const OccupancyGrid g = build_grid(s);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    TraceConfig c;
    c.mic_position = s.mic;
    c.energy_ceiling = 1e6;
    const auto path = trace_path({oracle::random_unit(rng), 4000, 1.0}, g, c);
    ASSERT_GE(path.rays.size(), 1u);
    ASSERT_LE(path.rays.size(), static_cast<std::size_t>(c.max_order + 1));
    EXPECT_EQ(path.rays[0].origin, s.mic);
    for (std::size_t k = 0; k < path.rays.size(); ++k) {
      const auto& r = path.rays[k];
      EXPECT_EQ(r.order, static_cast<int>(k));
      EXPECT_GT(r.length, 0.0);
      EXPECT_NEAR(r.direction.norm(), 1.0, 1e-12);
      if (k == 0) continue;
      const auto& prev = path.rays[k - 1];
      EXPECT_LE((r.origin - prev.end()).norm(), 0.5 * g.resolution() + 1e-9);
      EXPECT_GE(r.initial_energy, prev.initial_energy);
    }
  }
}

TEST(TracePath, DeterministicAndPure) {
  const Scenario s = static_room_scenario();
  const OccupancyGrid g = build_grid(s);
  TraceConfig c;
  c.mic_position = s.mic;
  const IncomingSignal sig{Vec3(-1, -2, -0.5).normalized(), 4000, 50.0};
  const auto a = trace_path(sig, g, c);
  const auto b = trace_path(sig, g, c);
  ASSERT_EQ(a.rays.size(), b.rays.size());
  for (std::size_t k = 0; k < a.rays.size(); ++k) {
    EXPECT_EQ(a.rays[k].origin, b.rays[k].origin);
    EXPECT_EQ(a.rays[k].direction, b.rays[k].direction);
    EXPECT_EQ(a.rays[k].length, b.rays[k].length);
  }
}

TEST(PathCsv, HeaderAndRows) {
  AcousticRay r;
  r.origin = Vec3(1.0, 2.0, 0.5);
  r.direction = Vec3(0, 0, 1);
  r.length = 1.0 / 3.0;
  r.initial_energy = 2.5;
  RayPath p;
  p.rays = {r};
  std::vector<RayPath> paths{p, p};
  std::ostringstream out;
  write_paths_header(out);
  write_path_rows(out, paths, 7);
  EXPECT_EQ(out.str(),
            "signal_id,order,ox,oy,oz,dx,dy,dz,length,energy\n"
            "7,0,1,2,0.5,0,0,1,0.333333333,2.5\n"
            "8,0,1,2,0.5,0,0,1,0.333333333,2.5\n");
}

}  // namespace
}  // namespace echoloc
