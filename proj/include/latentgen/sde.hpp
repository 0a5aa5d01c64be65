// Copyright 2026 The latentgen Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Multi-reference Langevin dynamics in latent space:
//
//   dX/dt = alpha * sum_k a_k (X_k - X) + xi(t)
//
// discretized with explicit Euler-Maruyama. Since the weights sum to one the
// drift equals alpha * (m - X) with m = sum_k a_k X_k, so every trajectory is an
// Ornstein-Uhlenbeck process relaxing towards the weighted centroid m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/random.hpp"

namespace latentgen::sde {

struct Reference {
  LatentVector vector;
  double weight = 0.0;
};

/// Attractors X_k with positive weights a_k summing to one.
class ReferenceSet {
 public:
  static constexpr double kWeightSumTolerance = 1e-12;

  explicit ReferenceSet(std::vector<Reference> refs) : refs_(std::move(refs)) {
    if (refs_.empty()) throw DomainError("ReferenceSet: at least one reference required");
    const std::size_t d = refs_.front().vector.dim();
    if (d == 0) throw ShapeError("ReferenceSet: zero-dimensional reference");
    double total = 0.0;
    for (const auto& r : refs_) {
      require_same_dim(r.vector.dim(), d, "ReferenceSet");
      require_finite(r.vector, "ReferenceSet");
      if (!(r.weight > 0.0) || !std::isfinite(r.weight)) {
        throw DomainError("ReferenceSet: weights must be positive, got " + std::to_string(r.weight));
      }
      total += r.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
      throw DomainError("ReferenceSet: weights must sum to 1, got " + std::to_string(total));
    }
    centroid_ = LatentVector(d, 0.0);
    for (const auto& r : refs_)
      for (std::size_t i = 0; i < d; ++i) centroid_[i] += r.weight * r.vector[i];
  }

  /// Rescales arbitrary positive weights to sum to one.
  static ReferenceSet normalized(std::vector<LatentVector> vectors, std::vector<double> weights) {
    require_same_dim(vectors.size(), weights.size(), "ReferenceSet::normalized");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("ReferenceSet: weights must be positive");
      total += w;
    }
    std::vector<Reference> refs;
    for (std::size_t k = 0; k < vectors.size(); ++k) refs.push_back({std::move(vectors[k]), weights[k] / total});
    // Re-normalize once more so the sum lands within rounding of 1.
    double s = 0.0;
    for (const auto& r : refs) s += r.weight;
    refs.back().weight += 1.0 - s;
    return ReferenceSet(std::move(refs));
  }

  static ReferenceSet single(LatentVector v) { return ReferenceSet({Reference{std::move(v), 1.0}}); }

  std::size_t dim() const noexcept { return centroid_.dim(); }
  std::size_t size() const noexcept { return refs_.size(); }
  const std::vector<Reference>& refs() const noexcept { return refs_; }

  /// sum_k a_k X_k, the fixed point of the drift.
  const LatentVector& centroid() const noexcept { return centroid_; }

 private:
  std::vector<Reference> refs_;
  LatentVector centroid_;
};

struct LangevinConfig {
  double alpha = 1.0;
  double dt = 0.01;
  std::size_t n_steps = 1000;
  double noise_sigma = 0.05;
  /// Per-component clamp on each noise increment; +inf disables it.
  double noise_clamp = 0.1;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("langevin: alpha must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("langevin: dt must be > 0");
    if (!(alpha * dt < 1.0)) throw ConfigError("langevin: alpha*dt must be < 1 for the explicit scheme");
    if (n_steps == 0) throw ConfigError("langevin: n_steps must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("langevin: noise_sigma must be >= 0");
    if (!(noise_clamp > 0.0)) throw ConfigError("langevin: noise_clamp must be > 0");
  }

  double t_end() const noexcept { return dt * static_cast<double>(n_steps); }
};

inline constexpr double kNoClamp = std::numeric_limits<double>::infinity();

/// Standard normal draws from a seeded engine.
template <class Engine = Rng>
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  explicit GaussianStream(Engine engine) : engine_(std::move(engine)) {}

  double operator()() { return normal_(engine_); }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// alpha * sum_k a_k (X_k - x).
inline LatentVector drift(const LatentVector& x, const ReferenceSet& refs, double alpha) {
  require_same_dim(x.dim(), refs.dim(), "drift");
  const auto& m = refs.centroid();
  LatentVector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = alpha * (m[i] - x[i]);
  return out;
}

/// One Euler-Maruyama noise increment: clamp(sigma * sqrt(dt) * z, +-clamp).
template <class Engine>
double noise_increment(const LangevinConfig& cfg, GaussianStream<Engine>& noise) {
  const double raw = cfg.noise_sigma * std::sqrt(cfg.dt) * noise();
  return std::clamp(raw, -cfg.noise_clamp, cfg.noise_clamp);
}

namespace detail {

template <class Engine>
void em_advance(std::span<double> x, std::span<const double> centroid, const LangevinConfig& cfg,
                double noise_scale, GaussianStream<Engine>& noise) {
  const double a_dt = cfg.alpha * cfg.dt;
  const bool noisy = noise_scale > 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double inc = 0.0;
    if (noisy) inc = std::clamp(noise_scale * noise(), -cfg.noise_clamp, cfg.noise_clamp);
    x[i] = x[i] + a_dt * (centroid[i] - x[i]) + inc;
  }
}

}  // namespace detail

/// x' = x + drift(x) dt + clamped noise, one standard normal per component.
template <class Engine>
LatentVector em_step(const LatentVector& x, const LangevinConfig& cfg, const ReferenceSet& refs,
                     GaussianStream<Engine>& noise) {
  require_same_dim(x.dim(), refs.dim(), "em_step");
  LatentVector out = x;
  detail::em_advance(out.span(), refs.centroid().span(), cfg, cfg.noise_sigma * std::sqrt(cfg.dt), noise);
  return out;
}

/// E[X(t) | X(0) = c] = e^{-alpha t} c + (1 - e^{-alpha t}) sum_k a_k X_k.
inline LatentVector analytic_mean(const LatentVector& c, const ReferenceSet& refs, double alpha, double t) {
  require_same_dim(c.dim(), refs.dim(), "analytic_mean");
  if (!(t >= 0.0)) throw DomainError("analytic_mean: t must be >= 0");
  const double decay = std::exp(-alpha * t);
  const double growth = -std::expm1(-alpha * t);
  const auto& m = refs.centroid();
  LatentVector out(c.dim());
  for (std::size_t i = 0; i < c.dim(); ++i) out[i] = decay * c[i] + growth * m[i];
  return out;
}

/// Stationary per-component variance of the unclamped process, sigma^2 / (2 alpha).
inline double stationary_variance(double noise_sigma, double alpha) { return noise_sigma * noise_sigma / (2.0 * alpha); }

/// Noise-free path sampled at every step (n_steps + 1 points including x(0)).
inline std::vector<LatentVector> deterministic_path(const LatentVector& c, const LangevinConfig& cfg,
                                                    const ReferenceSet& refs) {
  cfg.validate();
  require_same_dim(c.dim(), refs.dim(), "deterministic_path");
  std::vector<LatentVector> path;
  path.reserve(cfg.n_steps + 1);
  path.push_back(c);
  GaussianStream<> unused(0);
  LatentVector x = c;
  for (std::size_t s = 0; s < cfg.n_steps; ++s) {
    detail::em_advance(x.span(), refs.centroid().span(), cfg, 0.0, unused);
    path.push_back(x);
  }
  return path;
}

struct EnsembleOptions {
  /// Record ensemble mean/variance every `stats_stride` steps (step 0 included).
  bool record_stats = true;
  std::size_t stats_stride = 1;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct EnsembleResult {
  std::vector<LatentVector> finals;
  std::vector<std::size_t> stat_steps;
  std::vector<double> stat_times;
  std::vector<LatentVector> step_mean;
  /// Unbiased (n-1) ensemble variance per component.
  std::vector<LatentVector> step_variance;
};

inline std::uint64_t trajectory_seed(std::uint64_t root, std::size_t index) {
  return derive_seed(root, "sde.trajectory", index);
}

namespace detail {

inline constexpr std::size_t kEnsembleBlock = 64;

struct BlockStats {
  std::size_t count = 0;
  std::vector<std::vector<double>> mean;  // [record][component]
  std::vector<std::vector<double>> m2;
};

inline void merge_stats(BlockStats& into, const BlockStats& b) {
  if (b.count == 0) return;
  if (into.count == 0) {
    into = b;
    return;
  }
  const double na = static_cast<double>(into.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  for (std::size_t r = 0; r < into.mean.size(); ++r) {
    for (std::size_t i = 0; i < into.mean[r].size(); ++i) {
      const double delta = b.mean[r][i] - into.mean[r][i];
      into.mean[r][i] += delta * nb / n;
      into.m2[r][i] += b.m2[r][i] + delta * delta * na * nb / n;
    }
  }
  into.count += b.count;
}

/// Runs trajectories [begin, end) in lockstep, writing finals and block stats.
inline BlockStats run_block(const LatentVector& c, const LangevinConfig& cfg, const ReferenceSet& refs,
                            std::size_t begin, std::size_t end, const std::vector<std::size_t>& stat_steps,
                            std::vector<LatentVector>& finals) {
  const std::size_t d = c.dim();
  const std::size_t n = end - begin;
  std::vector<GaussianStream<>> streams;
  streams.reserve(n);
  for (std::size_t j = 0; j < n; ++j) streams.emplace_back(trajectory_seed(cfg.rng_seed, begin + j));
  std::vector<LatentVector> state(n, c);

  BlockStats stats;
  stats.count = n;
  stats.mean.assign(stat_steps.size(), std::vector<double>(d, 0.0));
  stats.m2.assign(stat_steps.size(), std::vector<double>(d, 0.0));

  auto record = [&](std::size_t r) {
    auto& mu = stats.mean[r];
    auto& m2 = stats.m2[r];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < d; ++i) mu[i] += state[j][i];
    for (std::size_t i = 0; i < d; ++i) mu[i] /= static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < d; ++i) {
        const double e = state[j][i] - mu[i];
        m2[i] += e * e;
      }
  };

  const double noise_scale = cfg.noise_sigma * std::sqrt(cfg.dt);
  const auto centroid = refs.centroid().span();
  std::size_t next = 0;
  if (next < stat_steps.size() && stat_steps[next] == 0) record(next++);
  for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
    for (std::size_t j = 0; j < n; ++j) em_advance(state[j].span(), centroid, cfg, noise_scale, streams[j]);
    if (next < stat_steps.size() && stat_steps[next] == s) record(next++);
  }
  for (std::size_t j = 0; j < n; ++j) finals[begin + j] = std::move(state[j]);
  return stats;
}

}  // namespace detail

/// `n_traj` independent trajectories from X(0) = c. Trajectory i draws its noise
/// from a stream seeded by (rng_seed, i), and statistics are merged in a fixed
/// block order, so results do not depend on the thread count.
inline EnsembleResult simulate_ensemble(const LatentVector& c, const LangevinConfig& cfg, const ReferenceSet& refs,
                                        std::size_t n_traj, const EnsembleOptions& opts = {}) {
  cfg.validate();
  require_same_dim(c.dim(), refs.dim(), "simulate_ensemble");
  require_finite(c, "simulate_ensemble");
  if (n_traj == 0) throw DomainError("simulate_ensemble: n_traj must be positive");
  if (opts.stats_stride == 0) throw ConfigError("simulate_ensemble: stats_stride must be positive");

  EnsembleResult result;
  result.finals.resize(n_traj);
  if (opts.record_stats) {
    for (std::size_t s = 0; s <= cfg.n_steps; s += opts.stats_stride) result.stat_steps.push_back(s);
    if (result.stat_steps.back() != cfg.n_steps) result.stat_steps.push_back(cfg.n_steps);
  }

  const std::size_t n_blocks = (n_traj + detail::kEnsembleBlock - 1) / detail::kEnsembleBlock;
  unsigned threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));

  detail::BlockStats total;
  std::vector<detail::BlockStats> wave(threads);
  for (std::size_t first = 0; first < n_blocks; first += threads) {
    const std::size_t count = std::min<std::size_t>(threads, n_blocks - first);
    auto work = [&](std::size_t w) {
      const std::size_t b = first + w;
      const std::size_t begin = b * detail::kEnsembleBlock;
      const std::size_t end = std::min(n_traj, begin + detail::kEnsembleBlock);
      wave[w] = detail::run_block(c, cfg, refs, begin, end, result.stat_steps, result.finals);
    };
    if (count == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (std::size_t w = 0; w < count; ++w) detail::merge_stats(total, wave[w]);
  }

  if (opts.record_stats) {
    const std::size_t d = c.dim();
    for (std::size_t r = 0; r < result.stat_steps.size(); ++r) {
      result.stat_times.push_back(static_cast<double>(result.stat_steps[r]) * cfg.dt);
      result.step_mean.emplace_back(total.mean[r]);
      LatentVector var(d, 0.0);
      if (n_traj > 1)
        for (std::size_t i = 0; i < d; ++i) var[i] = total.m2[r][i] / static_cast<double>(n_traj - 1);
      result.step_variance.push_back(std::move(var));
    }
  }
  return result;
}

}  // namespace latentgen::sde
