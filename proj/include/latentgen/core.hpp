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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace latentgen {

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure the library reports is one of these; the CLI
// maps them onto process exit codes.
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dimension or length mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (bad hyperparameter, stability guard violated, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class LookupError : public DataError {
 public:
  using DataError::DataError;
};

class CapacityError : public DataError {
 public:
  using DataError::DataError;
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed. Always a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Outcome of a screening rule; missing inputs never count as a pass.
enum class Status { Pass, Fail, Indeterminate };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    default: return "indeterminate";
  }
}

// ---------------------------------------------------------------------------
// LatentVector
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultLatentDim = 512;

/// A point in the molecular latent space.
class LatentVector {
 public:
  LatentVector() = default;
  explicit LatentVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit LatentVector(std::vector<double> values) : values_(std::move(values)) {}
  LatentVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const LatentVector&, const LatentVector&) = default;

 private:
  std::vector<double> values_;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

inline void require_finite(const LatentVector& v, const char* what) {
  if (!v.all_finite()) throw DataError(std::string(what) + ": latent vector has non-finite entries");
}

// ---------------------------------------------------------------------------
// Binding affinity units
// ---------------------------------------------------------------------------

/// Gas constant, cal/(mol K).
inline constexpr double kGasConstant = 1.987;
/// Absolute temperature, K.
inline constexpr double kTemperature = 298.15;
/// kcal/mol per decade of Ki. Used verbatim (RT ln 10 / 1000 rounds to it).
inline constexpr double kDeltaGPerLog10Ki = 1.3633;
inline constexpr double kMicromolar = 1e-6;

/// The measure a record's dG was derived from.
enum class SourceMeasure { DeltaG, Ki, IC50 };

struct AffinityRecord {
  std::string smiles;
  double delta_g = 0.0;  // kcal/mol
  SourceMeasure source_measure = SourceMeasure::DeltaG;
};

/// Binding free energy in kcal/mol from an inhibition constant in mol/L.
inline double ki_to_delta_g(double ki) {
  if (!std::isfinite(ki) || ki <= 0.0) {
    throw DomainError("ki_to_delta_g: Ki must be positive and finite, got " + std::to_string(ki));
  }
  return kDeltaGPerLog10Ki * std::log10(ki);
}

/// Ki ~ IC50 / 2 for competitive inhibition. Units are preserved.
inline double ic50_to_ki(double ic50) {
  if (!std::isfinite(ic50) || ic50 <= 0.0) {
    throw DomainError("ic50_to_ki: IC50 must be positive and finite, got " + std::to_string(ic50));
  }
  return ic50 / 2.0;
}

inline double micromolar_to_molar(double value_um) { return value_um * kMicromolar; }

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(std::span<const double> v1, std::span<const double> v2) {
  require_same_dim(v1.size(), v2.size(), "cosine_similarity");
  const double n1 = norm(v1);
  const double n2 = norm(v2);
  if (n1 == 0.0 || n2 == 0.0) throw DomainError("cosine_similarity: zero-norm vector");
  const double s = dot(v1, v2) / (n1 * n2);
  return std::clamp(s, -1.0, 1.0);
}

inline double cosine_similarity(const LatentVector& v1, const LatentVector& v2) {
  return cosine_similarity(v1.span(), v2.span());
}

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean: empty sequence");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Sample Pearson correlation coefficient.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size(), "pearson_r");
  if (x.size() < 2) throw DomainError("pearson_r: need at least two samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson_r: degenerate (constant) sequence");
  return sxy / std::sqrt(sxx * syy);
}

/// Root-mean-square error with denominator n.
inline double rmse(std::span<const double> y, std::span<const double> yhat) {
  require_same_dim(y.size(), yhat.size(), "rmse");
  if (y.empty()) throw DomainError("rmse: empty sequence");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

struct MetricReport {
  double pearson_r = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

inline MetricReport evaluate(std::span<const double> y, std::span<const double> yhat) {
  return MetricReport{pearson_r(y, yhat), rmse(y, yhat), y.size()};
}

}  // namespace latentgen
