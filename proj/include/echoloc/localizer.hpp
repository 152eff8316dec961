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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "echoloc/geometry.hpp"
#include "echoloc/ray_tracer.hpp"

namespace echoloc {

using Rng = std::mt19937_64;

struct LocalizerConfig {
  int particle_count = 1000;
  double sigma_s = 1.0;         // m, std of the per-iteration random step
  double sigma_c = 0.01;        // m^6, generalized-variance convergence threshold
  double sigma_w_floor = 0.15;  // m
  double sigma_w_scale = 0.2;
  int max_iterations = 500;
  std::uint64_t rng_seed = 1;
  bool reset_per_frame = false;
  // Order-0 rays all start at the array, so every path "meets" there. Feet
  // closer than this to the array are dropped for order-0 rays.
  double array_exclusion_radius = 0.5;  // m

  void validate() const;  // throws ConfigError
};

struct ParticleSet {
  std::vector<Vec3> particles;
  std::vector<double> weights;
  int iteration = 0;

  std::size_t size() const { return particles.size(); }
};

struct Estimate {
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  double gv = 0.0;  // det(covariance), m^6
  bool converged = false;
  int iterations_used = 0;
};

struct Spread {
  Vec3 mean = Vec3::Zero();
  Mat3 covariance = Mat3::Zero();
  double gv = 0.0;
};

struct Foot {
  Vec3 point;
  double along = 0.0;     // projection parameter on the ray
  double distance = 0.0;  // from the query point to `point`
};

ParticleSet init_particles(const Aabb& bounds, const LocalizerConfig& config, Rng& rng);

/// Moves every particle by d * u, d ~ N(0, sigma_s^2), u uniform on the unit
/// sphere, then clamps it into `bounds`.
void perturb(ParticleSet& set, const Aabb& bounds, const LocalizerConfig& config, Rng& rng);

/// Orthogonal projection of `p` onto the ray's line. Empty when the
/// projection falls outside the segment [0, ray.length].
std::optional<Foot> perpendicular_foot(const Vec3& p, const AcousticRay& ray);

/// Sum over paths of the best single-ray Gaussian weight. Unnormalized.
double likelihood(const Vec3& p, std::span<const RayPath> paths, double sigma_w,
                  double array_exclusion_radius = 0.0);

/// log(likelihood), computed without underflow. -inf when every foot is
/// filtered out.
double log_likelihood(const Vec3& p, std::span<const RayPath> paths, double sigma_w,
                      double array_exclusion_radius = 0.0);

/// Gaussian width used for weighting at the given particle spread.
double weight_sigma(double gv, const LocalizerConfig& config);

struct WeightingResult {
  double sigma_w = 0.0;
  bool zero_likelihood = false;  // weights were reset to uniform
};

/// Replaces the weights with normalized likelihoods.
WeightingResult compute_weights(ParticleSet& set, std::span<const RayPath> paths,
                                const LocalizerConfig& config);

/// Low-variance resampling positions u0 + j / W, u0 in [0, 1/W).
std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u0);

/// Systematic resampling. Output weights are uniform.
void resample(ParticleSet& set, Rng& rng);

/// Unbiased sample covariance of positions and its determinant.
Spread generalized_variance(const ParticleSet& set);

/// Stateful Monte Carlo localizer. The particle set survives between calls
/// to run() unless reset_per_frame is set.
class Localizer {
 public:
  Localizer(const Aabb& bounds, LocalizerConfig config);

  /// Iterate perturb -> weigh -> resample until the generalized variance
  /// drops below sigma_c or max_iterations is reached. With no paths the
  /// particle set is left untouched (see hold()).
  Estimate run(std::span<const RayPath> paths);

  /// Summary of the current particles without iterating. Initializes the
  /// set on first use.
  Estimate hold();

  const ParticleSet& particles() const;
  bool has_particles() const { return set_.has_value(); }
  long total_iterations() const { return total_iterations_; }
  int zero_likelihood_iterations() const { return zero_likelihood_iterations_; }
  const Aabb& bounds() const { return bounds_; }
  const LocalizerConfig& config() const { return config_; }

 private:
  void ensure_initialized();

  Aabb bounds_;
  LocalizerConfig config_;
  Rng rng_;
  std::optional<ParticleSet> set_;
  long total_iterations_ = 0;
  int zero_likelihood_iterations_ = 0;
};

/// One-shot localization from a fresh particle set.
Estimate localize(std::span<const RayPath> paths, const Aabb& bounds,
                  const LocalizerConfig& config);

struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // unit semi-axis directions as columns
  Vec3 lengths = Vec3::Zero();   // descending
};

/// Quantile of the chi-square distribution with 3 degrees of freedom.
double chi_square3_quantile(double level);

Ellipsoid confidence_ellipsoid(const Estimate& estimate, double level = 0.95);

// CSV dump: iteration,particle_id,x,y,z,weight
void write_particles_header(std::ostream& out);
void write_particle_rows(std::ostream& out, const ParticleSet& set, long iteration);

}  // namespace echoloc
