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

#include "echoloc/localizer.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "echoloc/csv.hpp"
#include "echoloc/errors.hpp"

namespace echoloc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  while (true) {
    const Vec3 v(n01(rng), n01(rng), n01(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

}  // namespace

void LocalizerConfig::validate() const {
  if (particle_count < 2) throw ConfigError("localizer.particles must be >= 2");
  if (!(sigma_s > 0.0)) throw ConfigError("localizer.sigma_s must be > 0");
  if (!(sigma_c > 0.0)) throw ConfigError("localizer.sigma_c must be > 0");
  if (!(sigma_w_floor > 0.0)) throw ConfigError("localizer.sigma_w_floor must be > 0");
  if (!(sigma_w_scale >= 0.0)) throw ConfigError("localizer.sigma_w_scale must be >= 0");
  if (max_iterations < 1) throw ConfigError("localizer.max_iterations must be >= 1");
  if (!(array_exclusion_radius >= 0.0)) {
    throw ConfigError("localizer.array_exclusion_radius must be >= 0");
  }
}

ParticleSet init_particles(const Aabb& bounds, const LocalizerConfig& config, Rng& rng) {
  if (bounds.degenerate()) throw ConfigError("init_particles: degenerate bounds");
  const auto w = static_cast<std::size_t>(config.particle_count);
  ParticleSet set;
  set.particles.reserve(w);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < w; ++i) {
    const Vec3 u(unit(rng), unit(rng), unit(rng));
    set.particles.push_back(bounds.min + u.cwiseProduct(bounds.extent()));
  }
  set.weights.assign(w, 1.0 / static_cast<double>(w));
  return set;
}

void perturb(ParticleSet& set, const Aabb& bounds, const LocalizerConfig& config, Rng& rng) {
  std::normal_distribution<double> step(0.0, config.sigma_s);
  for (auto& p : set.particles) {
    const Vec3 u = random_unit(rng);
    const double d = step(rng);
    p = bounds.clamp(p + d * u);
  }
}

std::optional<Foot> perpendicular_foot(const Vec3& p, const AcousticRay& ray) {
  const double s = (p - ray.origin).dot(ray.direction);
  if (s < 0.0 || s > ray.length) return std::nullopt;
  const Vec3 foot = ray.at(s);
  return Foot{foot, s, (p - foot).norm()};
}

double log_likelihood(const Vec3& p, std::span<const RayPath> paths, double sigma_w,
                      double array_exclusion_radius) {
  const double inv_two_var = 1.0 / (2.0 * sigma_w * sigma_w);
  double total = kNegInf;
  for (const auto& path : paths) {
    double best = kNegInf;
    for (const auto& ray : path.rays) {
      const auto foot = perpendicular_foot(p, ray);
      if (!foot) continue;
      if (ray.order == 0 && foot->along < array_exclusion_radius) continue;
      best = std::max(best, -foot->distance * foot->distance * inv_two_var);
    }
    total = log_add(total, best);
  }
  if (total == kNegInf) return kNegInf;
  return total - std::log(sigma_w * std::sqrt(2.0 * std::numbers::pi));
}

double likelihood(const Vec3& p, std::span<const RayPath> paths, double sigma_w,
                  double array_exclusion_radius) {
  return std::exp(log_likelihood(p, paths, sigma_w, array_exclusion_radius));
}

double weight_sigma(double gv, const LocalizerConfig& config) {
  const double spread = std::pow(std::max(gv, 0.0), 1.0 / 6.0);
  return std::max(config.sigma_w_floor, config.sigma_w_scale * spread);
}

WeightingResult compute_weights(ParticleSet& set, std::span<const RayPath> paths,
                                const LocalizerConfig& config) {
  WeightingResult result;
  result.sigma_w = weight_sigma(generalized_variance(set).gv, config);

  const std::size_t w = set.size();
  std::vector<double> logs(w);
  double best = kNegInf;
  for (std::size_t i = 0; i < w; ++i) {
    logs[i] = log_likelihood(set.particles[i], paths, result.sigma_w,
                             config.array_exclusion_radius);
    best = std::max(best, logs[i]);
  }
  set.weights.resize(w);
  if (best == kNegInf) {
    std::fill(set.weights.begin(), set.weights.end(), 1.0 / static_cast<double>(w));
    result.zero_likelihood = true;
    return result;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    set.weights[i] = std::exp(logs[i] - best);
    sum += set.weights[i];
  }
  for (auto& v : set.weights) v /= sum;
  return result;
}

std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u0) {
  const std::size_t w = weights.size();
  std::vector<std::size_t> out;
  out.reserve(w);
  const double spacing = 1.0 / static_cast<double>(w);
  double cumulative = weights.empty() ? 0.0 : weights[0];
  std::size_t i = 0;
  for (std::size_t j = 0; j < w; ++j) {
    const double target = u0 + static_cast<double>(j) * spacing;
    while (target >= cumulative && i + 1 < w) cumulative += weights[++i];
    out.push_back(i);
  }
  return out;
}

void resample(ParticleSet& set, Rng& rng) {
  const std::size_t w = set.size();
  std::uniform_real_distribution<double> offset(0.0, 1.0 / static_cast<double>(w));
  const auto picks = systematic_indices(set.weights, offset(rng));
  std::vector<Vec3> next;
  next.reserve(w);
  for (const auto i : picks) next.push_back(set.particles[i]);
  set.particles = std::move(next);
  set.weights.assign(w, 1.0 / static_cast<double>(w));
}

Spread generalized_variance(const ParticleSet& set) {
  const std::size_t w = set.size();
  if (w < 2) throw ConfigError("generalized_variance needs at least 2 particles");
  Spread s;
  for (const auto& p : set.particles) s.mean += p;
  s.mean /= static_cast<double>(w);
  for (const auto& p : set.particles) {
    const Vec3 d = p - s.mean;
    s.covariance.noalias() += d * d.transpose();
  }
  s.covariance /= static_cast<double>(w - 1);
  s.gv = s.covariance.determinant();
  return s;
}

Localizer::Localizer(const Aabb& bounds, LocalizerConfig config)
    : bounds_(bounds), config_(config), rng_(config.rng_seed) {
  config_.validate();
  if (bounds_.degenerate()) throw ConfigError("Localizer: degenerate bounds");
}

void Localizer::ensure_initialized() {
  if (!set_) set_ = init_particles(bounds_, config_, rng_);
}

const ParticleSet& Localizer::particles() const {
  if (!set_) throw std::logic_error("Localizer: no particles yet");
  return *set_;
}

Estimate Localizer::hold() {
  ensure_initialized();
  const Spread s = generalized_variance(*set_);
  return {s.mean, s.covariance, s.gv, false, 0};
}

Estimate Localizer::run(std::span<const RayPath> paths) {
  if (paths.empty()) return hold();
  if (config_.reset_per_frame) set_.reset();
  ensure_initialized();

  ParticleSet& set = *set_;
  Spread spread;
  int used = 0;
  while (used < config_.max_iterations) {
    perturb(set, bounds_, config_, rng_);
    if (compute_weights(set, paths, config_).zero_likelihood) ++zero_likelihood_iterations_;
    resample(set, rng_);
    ++set.iteration;
    ++used;
    ++total_iterations_;
    spread = generalized_variance(set);
    if (spread.gv < config_.sigma_c) break;
  }
  return {spread.mean, spread.covariance, spread.gv, spread.gv < config_.sigma_c, used};
}

Estimate localize(std::span<const RayPath> paths, const Aabb& bounds,
                  const LocalizerConfig& config) {
  Localizer loc(bounds, config);
  return loc.run(paths);
}

double chi_square3_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(3.0), level);
}

Ellipsoid confidence_ellipsoid(const Estimate& estimate, double level) {
  const double q = chi_square3_quantile(level);
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(estimate.covariance);
  Ellipsoid e;
  e.center = estimate.mean;
  // Eigen sorts eigenvalues ascending; report the longest axis first.
  for (int k = 0; k < 3; ++k) {
    const int src = 2 - k;
    e.axes.col(k) = eig.eigenvectors().col(src);
    e.lengths[k] = std::sqrt(q * std::max(eig.eigenvalues()[src], 0.0));
  }
  return e;
}

void write_particles_header(std::ostream& out) {
  out << "iteration,particle_id,x,y,z,weight\n";
}

void write_particle_rows(std::ostream& out, const ParticleSet& set, long iteration) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec3& p = set.particles[i];
    out << iteration << ',' << i << ',' << csv_real(p.x()) << ',' << csv_real(p.y()) << ','
        << csv_real(p.z()) << ',' << csv_real(set.weights[i]) << '\n';
  }
}

}  // namespace echoloc
