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

// 1-D Fokker-Planck solver for dX = mu(X) dt + sigma dW,
//
//   dp/dt = -d(mu p)/dx + (sigma^2 / 2) d^2p/dx^2,
//
// explicit finite volumes on a cell-centred grid. Interface fluxes use the
// central average for advection and a two-point gradient for diffusion; the
// outer faces carry zero flux, so total mass changes only by rounding.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "latentgen/core.hpp"

namespace latentgen::fp {

class DensityGrid {
 public:
  DensityGrid(double x_min, double x_max, std::vector<double> p) : x_min_(x_min), x_max_(x_max), p_(std::move(p)) {
    if (!(x_max_ > x_min_) || !std::isfinite(x_min_) || !std::isfinite(x_max_)) {
      throw DomainError("DensityGrid: need finite x_min < x_max");
    }
    if (p_.empty()) throw DomainError("DensityGrid: n_cells must be positive");
  }

  /// Zero density on `n_cells` cells.
  static DensityGrid zeros(double x_min, double x_max, std::size_t n_cells) {
    return DensityGrid(x_min, x_max, std::vector<double>(n_cells, 0.0));
  }

  /// Cell averages of a Gaussian density, renormalized on the grid.
  static DensityGrid gaussian(double x_min, double x_max, std::size_t n_cells, double mean, double variance) {
    if (!(variance > 0.0)) throw DomainError("DensityGrid::gaussian: variance must be > 0");
    auto g = zeros(x_min, x_max, n_cells);
    const double s = std::sqrt(2.0 * variance);
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double a = (g.edge(i) - mean) / s;
      const double b = (g.edge(i + 1) - mean) / s;
      g.p_[i] = 0.5 * (std::erf(b) - std::erf(a)) / g.dx();
    }
    g.normalize();
    return g;
  }

  /// All mass in the cell containing x0.
  static DensityGrid point_mass(double x_min, double x_max, std::size_t n_cells, double x0) {
    auto g = zeros(x_min, x_max, n_cells);
    const auto i = g.cell_of(x0);
    if (i < 0) throw DomainError("DensityGrid::point_mass: x0 outside the grid");
    g.p_[static_cast<std::size_t>(i)] = 1.0 / g.dx();
    return g;
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n_cells() const noexcept { return p_.size(); }
  double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(p_.size()); }
  double edge(std::size_t i) const noexcept { return x_min_ + dx() * static_cast<double>(i); }
  double center(std::size_t i) const noexcept { return x_min_ + dx() * (static_cast<double>(i) + 0.5); }

  /// Index of the cell containing x, or -1 when outside [x_min, x_max].
  std::ptrdiff_t cell_of(double x) const noexcept {
    if (!(x >= x_min_) || !(x <= x_max_)) return -1;
    auto i = static_cast<std::ptrdiff_t>((x - x_min_) / dx());
    return std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(p_.size()) - 1);
  }

  std::span<const double> p() const noexcept { return p_; }
  std::span<double> p() noexcept { return p_; }

  double mass() const noexcept {
    double s = 0.0;
    for (double v : p_) s += v;
    return s * dx();
  }

  double mean() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) s += center(i) * p_[i];
    return s * dx() / mass();
  }

  double variance() const noexcept {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      const double e = center(i) - mu;
      s += e * e * p_[i];
    }
    return s * dx() / mass();
  }

  double min_value() const noexcept { return *std::min_element(p_.begin(), p_.end()); }

  void normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw DomainError("DensityGrid::normalize: zero mass");
    for (double& v : p_) v /= m;
  }

  /// Merges `factor` adjacent cells; n_cells must be divisible by factor.
  DensityGrid coarsened(std::size_t factor) const {
    if (factor == 0 || p_.size() % factor != 0) throw DomainError("DensityGrid::coarsened: factor must divide n_cells");
    std::vector<double> q(p_.size() / factor, 0.0);
    for (std::size_t i = 0; i < p_.size(); ++i) q[i / factor] += p_[i] / static_cast<double>(factor);
    return DensityGrid(x_min_, x_max_, std::move(q));
  }

 private:
  double x_min_;
  double x_max_;
  std::vector<double> p_;
};

/// mu(x) = alpha * (x_ref - x) + constant.
struct LinearDrift {
  double alpha = 0.0;
  double x_ref = 0.0;
  double constant = 0.0;
  double operator()(double x) const noexcept { return alpha * (x_ref - x) + constant; }
};

struct FPConfig {
  std::function<double(double)> drift = LinearDrift{};
  double sigma = 1.0;
  double dt_pde = 1e-4;
  double t_end = 1.0;
};

/// sigma^2 dt / dx^2 upper bound for the explicit diffusion term.
inline constexpr double kDiffusionCfl = 0.5;
/// |mu| dt / dx upper bound for the explicit advection term.
inline constexpr double kAdvectionCfl = 0.5;

inline void check_stability(const DensityGrid& grid, const FPConfig& cfg, double dt) {
  if (!cfg.drift) throw ConfigError("fp: drift function is empty");
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) throw ConfigError("fp: sigma must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("fp: dt_pde must be > 0");
  const double dx = grid.dx();
  const double diffusion = cfg.sigma * cfg.sigma * dt / (dx * dx);
  if (diffusion > kDiffusionCfl) {
    throw ConfigError("fp: CFL violation, sigma^2*dt/dx^2 = " + std::to_string(diffusion) + " > 0.5");
  }
  double max_mu = 0.0;
  for (std::size_t i = 0; i <= grid.n_cells(); ++i) max_mu = std::max(max_mu, std::abs(cfg.drift(grid.edge(i))));
  if (max_mu * dt / dx > kAdvectionCfl) {
    throw ConfigError("fp: CFL violation, max|mu|*dt/dx = " + std::to_string(max_mu * dt / dx) + " > 0.5");
  }
}

namespace detail {

inline void step_in_place(std::vector<double>& p, std::vector<double>& flux, const std::vector<double>& mu_face,
                          double diff_coef, double dx, double dt) {
  const std::size_t n = p.size();
  // flux[i] is the flux through the face between cells i-1 and i; faces 0 and n are walls.
  flux[0] = 0.0;
  flux[n] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    flux[i] = mu_face[i] * 0.5 * (p[i - 1] + p[i]) - diff_coef * (p[i] - p[i - 1]) / dx;
  }
  const double r = dt / dx;
  for (std::size_t i = 0; i < n; ++i) p[i] -= r * (flux[i + 1] - flux[i]);
}

}  // namespace detail

/// One explicit step of size cfg.dt_pde.
inline DensityGrid fp_step(const DensityGrid& grid, const FPConfig& cfg) {
  check_stability(grid, cfg, cfg.dt_pde);
  std::vector<double> p(grid.p().begin(), grid.p().end());
  std::vector<double> flux(p.size() + 1);
  std::vector<double> mu_face(p.size() + 1);
  for (std::size_t i = 0; i <= p.size(); ++i) mu_face[i] = cfg.drift(grid.edge(i));
  detail::step_in_place(p, flux, mu_face, 0.5 * cfg.sigma * cfg.sigma, grid.dx(), cfg.dt_pde);
  return DensityGrid(grid.x_min(), grid.x_max(), std::move(p));
}

/// Integrates to cfg.t_end. The step is shortened to t_end / ceil(t_end / dt_pde)
/// so the final time is hit exactly.
inline DensityGrid solve(const DensityGrid& grid0, const FPConfig& cfg) {
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("fp: t_end must be > 0");
  if (!(cfg.dt_pde > 0.0)) throw ConfigError("fp: dt_pde must be > 0");
  const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt_pde - 1e-9));
  const double dt = cfg.t_end / static_cast<double>(n_steps);
  check_stability(grid0, cfg, dt);

  std::vector<double> p(grid0.p().begin(), grid0.p().end());
  std::vector<double> flux(p.size() + 1);
  std::vector<double> mu_face(p.size() + 1);
  for (std::size_t i = 0; i <= p.size(); ++i) mu_face[i] = cfg.drift(grid0.edge(i));
  const double diff_coef = 0.5 * cfg.sigma * cfg.sigma;
  for (std::size_t s = 0; s < n_steps; ++s) detail::step_in_place(p, flux, mu_face, diff_coef, grid0.dx(), dt);
  return DensityGrid(grid0.x_min(), grid0.x_max(), std::move(p));
}

/// Half-width of a grid covering +-8 stationary standard deviations of an OU process.
inline double ou_half_width(double sigma, double gamma, double n_sd = 8.0) {
  return n_sd * std::sqrt(sigma * sigma / (2.0 * gamma));
}

/// L1 distance between two densities on identically shaped grids.
inline double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (a.n_cells() != b.n_cells() || a.x_min() != b.x_min() || a.x_max() != b.x_max()) {
    throw ShapeError("l1_distance: grids differ");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.n_cells(); ++i) s += std::abs(a.p()[i] - b.p()[i]);
  return s * a.dx();
}

struct EnsembleComparison {
  std::size_t n_samples = 0;
  std::size_t n_out_of_range = 0;
  double out_of_range_fraction = 0.0;
  bool all_out_of_range = false;
  /// L1 distance between the in-range histogram (normalized) and p; NaN when
  /// no sample falls in range.
  double l1 = 0.0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double mean_delta = 0.0;      // sample - grid
  double variance_delta = 0.0;  // sample - grid
};

inline constexpr std::size_t kMinComparisonSamples = 10000;

inline EnsembleComparison compare_ensemble(std::span<const double> samples, const DensityGrid& grid,
                                           std::size_t min_samples = kMinComparisonSamples) {
  if (samples.size() < min_samples) {
    throw DomainError("compare_ensemble: need at least " + std::to_string(min_samples) + " samples, got " +
                      std::to_string(samples.size()));
  }
  EnsembleComparison rep;
  rep.n_samples = samples.size();

  std::vector<double> counts(grid.n_cells(), 0.0);
  double sum = 0.0;
  for (double x : samples) {
    sum += x;
    const auto i = grid.cell_of(x);
    if (i < 0) {
      ++rep.n_out_of_range;
    } else {
      counts[static_cast<std::size_t>(i)] += 1.0;
    }
  }
  const double n = static_cast<double>(samples.size());
  rep.sample_mean = sum / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - rep.sample_mean) * (x - rep.sample_mean);
  rep.sample_variance = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
  rep.mean_delta = rep.sample_mean - grid.mean();
  rep.variance_delta = rep.sample_variance - grid.variance();

  rep.out_of_range_fraction = static_cast<double>(rep.n_out_of_range) / n;
  const std::size_t in_range = rep.n_samples - rep.n_out_of_range;
  rep.all_out_of_range = in_range == 0;
  if (rep.all_out_of_range) {
    rep.l1 = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const double norm = 1.0 / (static_cast<double>(in_range) * grid.dx());
  const double grid_mass = grid.mass();
  double l1 = 0.0;
  for (std::size_t i = 0; i < grid.n_cells(); ++i) l1 += std::abs(counts[i] * norm - grid.p()[i] / grid_mass);
  rep.l1 = l1 * grid.dx();
  return rep;
}

/// Inverse-CDF sampling from the piecewise-constant density; `u` in [0, 1).
inline double sample_from(const DensityGrid& grid, double u, std::span<const double> cdf) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(grid.n_cells()) - 1));
  const double lo = i == 0 ? 0.0 : cdf[i - 1];
  const double width = cdf[i] - lo;
  const double frac = width > 0.0 ? (u - lo) / width : 0.5;
  return grid.edge(i) + frac * grid.dx();
}

/// Cumulative cell masses, normalized so the last entry is 1.
inline std::vector<double> cumulative(const DensityGrid& grid) {
  std::vector<double> cdf(grid.n_cells());
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    acc += std::max(0.0, grid.p()[i]) * grid.dx();
    cdf[i] = acc;
  }
  for (double& c : cdf) c /= acc;
  return cdf;
}

}  // namespace latentgen::fp
