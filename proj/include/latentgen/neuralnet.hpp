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

// Feed-forward regression networks: dense layers, backprop, Adam, the
// piecewise learning-rate schedule, k-fold cross validation and a JSON
// parameter format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"
#include "latentgen/random.hpp"

namespace latentgen::nn {

// ---------------------------------------------------------------------------
// Matrix: row-major, one sample per row.
// ---------------------------------------------------------------------------
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols}; }

  static Matrix from_rows(const std::vector<LatentVector>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().dim());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      require_same_dim(rows[r].dim(), m.cols, "Matrix::from_rows");
      std::copy(rows[r].begin(), rows[r].end(), m.row(r));
    }
    return m;
  }

  static Matrix column(std::span<const double> v) {
    Matrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
  }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix m(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r) std::copy(row(idx[r]), row(idx[r]) + cols, m.row(r));
    return m;
  }
};

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------
enum class Activation { ReLU, Tanh };

inline std::string to_string(Activation a) { return a == Activation::ReLU ? "relu" : "tanh"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu" || s == "ReLU") return Activation::ReLU;
  if (s == "tanh" || s == "Tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

struct MlpSpec {
  std::size_t input_dim = kDefaultLatentDim;
  std::vector<std::size_t> hidden{512, 1024, 512};
  Activation activation = Activation::ReLU;
  std::size_t output_dim = 1;

  void validate() const {
    if (input_dim == 0 || output_dim == 0) throw ConfigError("MlpSpec: widths must be >= 1");
    for (auto w : hidden)
      if (w == 0) throw ConfigError("MlpSpec: hidden widths must be >= 1");
  }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
};

inline double activate(Activation a, double z) { return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

/// Derivative expressed through the pre-activation z and activation value y.
inline double activate_grad(Activation a, double z, double y) {
  return a == Activation::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - y * y;
}

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t prev = spec_.input_dim;
    auto add = [&](std::size_t width) {
      layers_.push_back(DenseLayer{prev, width, std::vector<double>(prev * width, 0.0), std::vector<double>(width, 0.0)});
      prev = width;
    };
    for (auto w : spec_.hidden) add(w);
    add(spec_.output_dim);
  }

  /// Uniform He-style initialization (Glorot for Tanh); biases start at zero.
  static Mlp initialized(MlpSpec spec, std::uint64_t seed) {
    Mlp net(std::move(spec));
    Rng rng(derive_seed(seed, "nn.init"));
    for (auto& layer : net.layers_) {
      const double fan = net.spec_.activation == Activation::ReLU ? static_cast<double>(layer.in)
                                                                   : 0.5 * static_cast<double>(layer.in + layer.out);
      const double limit = std::sqrt(6.0 / fan);
      for (double& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * limit;
    }
    return net;
  }

  const MlpSpec& spec() const noexcept { return spec_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// Flat parameter addressing: per layer, weights then bias.
  double& parameter(std::size_t k) {
    for (auto& l : layers_) {
      if (k < l.weights.size()) return l.weights[k];
      k -= l.weights.size();
      if (k < l.bias.size()) return l.bias[k];
      k -= l.bias.size();
    }
    throw DomainError("Mlp::parameter: index out of range");
  }

  /// Applies layers [first, last). Hidden layers are activated, the final
  /// layer of the network is affine.
  Matrix forward_range(const Matrix& x, std::size_t first, std::size_t last) const {
    if (first > last || last > layers_.size()) throw DomainError("Mlp::forward_range: bad layer range");
    Matrix a = x;
    for (std::size_t l = first; l < last; ++l) a = apply_layer(l, a, nullptr);
    return a;
  }

  Matrix forward(const Matrix& x) const {
    require_same_dim(x.cols, spec_.input_dim, "Mlp::forward");
    return forward_range(x, 0, layers_.size());
  }

  /// Layer l on a batch. Stores pre-activations in `pre` when given.
  Matrix apply_layer(std::size_t l, const Matrix& a, Matrix* pre) const {
    const auto& layer = layers_[l];
    require_same_dim(a.cols, layer.in, "Mlp layer input");
    const bool last = l + 1 == layers_.size();
    Matrix z(a.rows, layer.out);
    for (std::size_t b = 0; b < a.rows; ++b) {
      const double* in = a.row(b);
      double* zr = z.row(b);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + o * layer.in;
        double s = layer.bias[o];
        for (std::size_t i = 0; i < layer.in; ++i) s += w[i] * in[i];
        zr[o] = s;
      }
    }
    if (last) {
      if (pre) *pre = z;
      return z;
    }
    Matrix y = z;
    for (double& v : y.data) v = activate(spec_.activation, v);
    if (pre) *pre = std::move(z);
    return y;
  }

 private:
  MlpSpec spec_;
  std::vector<DenseLayer> layers_;
};

// ---------------------------------------------------------------------------
// Loss and backprop
// ---------------------------------------------------------------------------
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  explicit Gradients(const Mlp& net) {
    for (const auto& l : net.layers()) {
      weights.emplace_back(l.weights.size(), 0.0);
      bias.emplace_back(l.bias.size(), 0.0);
    }
  }

  double flat(std::size_t k) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (k < weights[l].size()) return weights[l][k];
      k -= weights[l].size();
      if (k < bias[l].size()) return bias[l][k];
      k -= bias[l].size();
    }
    throw DomainError("Gradients::flat: index out of range");
  }
};

struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] is the input
  std::vector<Matrix> pre;          // pre-activation of each layer
};

inline ForwardCache forward_cached(const Mlp& net, const Matrix& x) {
  require_same_dim(x.cols, net.spec().input_dim, "forward_cached");
  ForwardCache cache;
  cache.activations.push_back(x);
  cache.pre.resize(net.layers().size());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    cache.activations.push_back(net.apply_layer(l, cache.activations.back(), &cache.pre[l]));
  }
  return cache;
}

/// Mean squared error over all samples and outputs.
inline double mse_loss(const Mlp& net, const Matrix& x, const Matrix& y) {
  const Matrix pred = net.forward(x);
  require_same_dim(pred.rows, y.rows, "mse_loss rows");
  require_same_dim(pred.cols, y.cols, "mse_loss cols");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double r = pred.data[i] - y.data[i];
    s += r * r;
  }
  return s / static_cast<double>(pred.data.size());
}

/// MSE loss and its gradient with respect to every parameter.
inline double loss_and_gradients(const Mlp& net, const Matrix& x, const Matrix& y, Gradients& grad,
                                 const ForwardCache* precomputed = nullptr) {
  ForwardCache local;
  if (!precomputed) local = forward_cached(net, x);
  const ForwardCache& cache = precomputed ? *precomputed : local;
  const Matrix& pred = cache.activations.back();
  require_same_dim(pred.rows, y.rows, "loss rows");
  require_same_dim(pred.cols, y.cols, "loss cols");

  const double scale = 1.0 / static_cast<double>(pred.data.size());
  Matrix delta(pred.rows, pred.cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double r = pred.data[i] - y.data[i];
    loss += r * r;
    delta.data[i] = 2.0 * r * scale;
  }
  loss *= scale;

  const auto& layers = net.layers();
  const Activation act = net.spec().activation;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Matrix& a_in = cache.activations[l];
    auto& gw = grad.weights[l];
    auto& gb = grad.bias[l];
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t b = 0; b < delta.rows; ++b) {
      const double* d = delta.row(b);
      const double* in = a_in.row(b);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        gb[o] += dv;
        double* g = gw.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) g[i] += dv * in[i];
      }
    }
    if (l == 0) break;
    // Propagate to the previous layer's activations, then through its nonlinearity.
    Matrix prev(delta.rows, layer.in);
    for (std::size_t b = 0; b < delta.rows; ++b) {
      const double* d = delta.row(b);
      double* p = prev.row(b);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) p[i] += dv * w[i];
      }
    }
    const Matrix& z = cache.pre[l - 1];
    const Matrix& y_act = cache.activations[l];
    for (std::size_t i = 0; i < prev.data.size(); ++i) prev.data[i] *= activate_grad(act, z.data[i], y_act.data[i]);
    delta = std::move(prev);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------
struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t rejected_at_kinks = 0;
};

/// Denominator floor of the relative error, so parameters with vanishing
/// gradients are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-6;

/// Backprop gradients against central finite differences on `n_params`
/// randomly chosen parameters. For ReLU networks, parameters whose +-h
/// perturbation flips any hidden unit's sign are rejected and redrawn.
inline GradCheckReport grad_check(const Mlp& net, const Matrix& x, const Matrix& y, std::size_t n_params = 100,
                                  double h = 1e-5, std::uint64_t seed = 0) {
  if (x.rows == 0) throw DomainError("grad_check: empty batch");
  Gradients grad(net);
  loss_and_gradients(net, x, y, grad);

  auto sign_pattern = [](const ForwardCache& c) {
    std::vector<bool> s;
    for (std::size_t l = 0; l + 1 < c.pre.size(); ++l)
      for (double v : c.pre[l].data) s.push_back(v > 0.0);
    return s;
  };

  GradCheckReport rep;
  const std::size_t total = net.parameter_count();
  const std::size_t target = std::min(n_params, total);
  Rng rng(derive_seed(seed, "nn.gradcheck"));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order.begin(), order.end(), rng);

  Mlp probe = net;
  const bool relu = net.spec().activation == Activation::ReLU;
  for (std::size_t k : order) {
    if (rep.checked >= target) break;
    double& p = probe.parameter(k);
    const double orig = p;
    p = orig + h;
    const auto plus_cache = forward_cached(probe, x);
    p = orig - h;
    const auto minus_cache = forward_cached(probe, x);
    p = orig;
    if (relu && sign_pattern(plus_cache) != sign_pattern(minus_cache)) {
      ++rep.rejected_at_kinks;
      continue;
    }
    auto loss_of = [&](const ForwardCache& c) {
      const Matrix& pred = c.activations.back();
      double s = 0.0;
      for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double r = pred.data[i] - y.data[i];
        s += r * r;
      }
      return s / static_cast<double>(pred.data.size());
    };
    const double fd = (loss_of(plus_cache) - loss_of(minus_cache)) / (2.0 * h);
    const double bp = grad.flat(k);
    const double denom = std::max({std::abs(fd), std::abs(bp), kGradCheckFloor});
    rep.max_relative_error = std::max(rep.max_relative_error, std::abs(fd - bp) / denom);
    ++rep.checked;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------
struct LrPhase {
  std::size_t first_epoch = 1;  // 1-based
  double lr = 1e-4;
};

struct TrainConfig {
  std::size_t epochs = 1000;
  std::vector<LrPhase> lr_schedule{{1, 1e-4}, {501, 1e-5}};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::uint64_t rng_seed = 0;
  bool standardize_features = true;
  bool standardize_targets = true;

  void validate() const {
    if (epochs == 0) throw ConfigError("train: epochs must be positive");
    if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (lr_schedule.empty() || lr_schedule.front().first_epoch != 1) {
      throw ConfigError("train: learning-rate schedule must start at epoch 1");
    }
    for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
      const auto& ph = lr_schedule[i];
      if (ph.first_epoch < 1 || ph.first_epoch > epochs) throw ConfigError("train: schedule breakpoint outside [1, epochs]");
      if (i > 0 && ph.first_epoch <= lr_schedule[i - 1].first_epoch) throw ConfigError("train: schedule must be increasing");
      if (!(ph.lr > 0.0)) throw ConfigError("train: learning rates must be > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
      throw ConfigError("train: invalid Adam hyperparameters");
    }
  }

  double lr_at(std::size_t epoch) const {
    double lr = lr_schedule.front().lr;
    for (const auto& ph : lr_schedule)
      if (epoch >= ph.first_epoch) lr = ph.lr;
    return lr;
  }
};

/// Per-column affine scaling (x - mean) / scale.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  bool active() const noexcept { return !mean.empty(); }

  static Standardizer fit(const Matrix& m) {
    Standardizer s;
    s.mean.assign(m.cols, 0.0);
    s.scale.assign(m.cols, 1.0);
    if (m.rows == 0) return s;
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) s.mean[c] += m(r, c);
    for (double& v : s.mean) v /= static_cast<double>(m.rows);
    std::vector<double> var(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) {
        const double e = m(r, c) - s.mean[c];
        var[c] += e * e;
      }
    for (std::size_t c = 0; c < m.cols; ++c) {
      const double sd = std::sqrt(var[c] / static_cast<double>(m.rows));
      s.scale[c] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  Matrix apply(const Matrix& m) const {
    if (!active()) return m;
    require_same_dim(m.cols, mean.size(), "Standardizer::apply");
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = (m(r, c) - mean[c]) / scale[c];
    return out;
  }

  Matrix invert(const Matrix& m) const {
    if (!active()) return m;
    require_same_dim(m.cols, mean.size(), "Standardizer::invert");
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(r, c) * scale[c] + mean[c];
    return out;
  }
};

/// Features plus targets, one sample per row.
struct Dataset {
  Matrix features;
  Matrix targets;

  std::size_t size() const noexcept { return features.rows; }

  static Dataset regression(Matrix features, std::span<const double> y) {
    require_same_dim(features.rows, y.size(), "Dataset::regression");
    return Dataset{std::move(features), Matrix::column(y)};
  }

  Dataset subset(std::span<const std::size_t> idx) const {
    return Dataset{features.select_rows(idx), targets.select_rows(idx)};
  }
};

/// A network plus the scalers fitted on its training data.
struct TrainedModel {
  Mlp net;
  Standardizer feature_scaler;
  Standardizer target_scaler;
  std::uint64_t seed = 0;

  Matrix predict(const Matrix& x) const { return target_scaler.invert(net.forward(feature_scaler.apply(x))); }

  double predict_one(const LatentVector& v) const {
    Matrix x(1, v.dim());
    std::copy(v.begin(), v.end(), x.row(0));
    return predict(x)(0, 0);
  }

  std::vector<double> predict_column(const Matrix& x) const {
    const Matrix p = predict(x);
    std::vector<double> out(p.rows);
    for (std::size_t r = 0; r < p.rows; ++r) out[r] = p(r, 0);
    return out;
  }
};

struct TrainResult {
  TrainedModel model;
  /// Mean minibatch MSE of each epoch, in original target units.
  std::vector<double> loss_history;
};

class Adam {
 public:
  Adam(const Mlp& net, const TrainConfig& cfg) : m_(net), v_(net), cfg_(cfg) {}

  void step(Mlp& net, const Gradients& g, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto update = [&](std::vector<double>& p, const std::vector<double>& gr, std::vector<double>& m,
                      std::vector<double>& v) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gr[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gr[i] * gr[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    };
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weights, g.weights[l], m_.weights[l], v_.weights[l]);
      update(layers[l].bias, g.bias[l], m_.bias[l], v_.bias[l]);
    }
  }

 private:
  Gradients m_;
  Gradients v_;
  TrainConfig cfg_;
  std::uint64_t t_ = 0;
};

/// Mini-batch Adam on MSE. Initialization and per-epoch shuffles derive from
/// cfg.rng_seed, so equal inputs give bit-identical results.
inline TrainResult train(const Dataset& data, const MlpSpec& spec, const TrainConfig& cfg) {
  cfg.validate();
  spec.validate();
  if (data.size() == 0) throw DomainError("train: empty dataset");
  require_same_dim(data.features.cols, spec.input_dim, "train features");
  require_same_dim(data.targets.cols, spec.output_dim, "train targets");
  require_same_dim(data.targets.rows, data.features.rows, "train rows");
  for (double v : data.features.data)
    if (!std::isfinite(v)) throw DataError("train: non-finite feature value");
  for (double v : data.targets.data)
    if (!std::isfinite(v)) throw DataError("train: non-finite target value");

  TrainResult result{TrainedModel{Mlp::initialized(spec, cfg.rng_seed), {}, {}, cfg.rng_seed}, {}};
  TrainedModel& model = result.model;
  if (cfg.standardize_features) model.feature_scaler = Standardizer::fit(data.features);
  if (cfg.standardize_targets) model.target_scaler = Standardizer::fit(data.targets);
  const Matrix x = model.feature_scaler.apply(data.features);
  const Matrix y = model.target_scaler.apply(data.targets);

  // Loss in original units: residual * scale per output column.
  std::vector<double> out_scale(spec.output_dim, 1.0);
  if (model.target_scaler.active()) out_scale = model.target_scaler.scale;

  Adam adam(model.net, cfg);
  Gradients grad(model.net);
  Rng shuffle_rng(derive_seed(cfg.rng_seed, "nn.shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    deterministic_shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = cfg.lr_at(epoch);
    double sq_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = x.select_rows(idx);
      const Matrix yb = y.select_rows(idx);
      const auto cache = forward_cached(model.net, xb);
      const Matrix& pred = cache.activations.back();
      for (std::size_t r = 0; r < pred.rows; ++r)
        for (std::size_t c = 0; c < pred.cols; ++c) {
          const double res = (pred(r, c) - yb(r, c)) * out_scale[c];
          sq_sum += res * res;
        }
      count += pred.data.size();
      const double loss = loss_and_gradients(model.net, xb, yb, grad, &cache);
      if (!std::isfinite(loss)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                            "; lower the learning rate or check feature scaling");
      }
      adam.step(model.net, grad, lr);
    }
    const double epoch_loss = sq_sum / static_cast<double>(count);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                          "; lower the learning rate or check feature scaling");
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

// ---------------------------------------------------------------------------
// k-fold cross validation
// ---------------------------------------------------------------------------
struct FoldReport {
  std::size_t k = 0;
  std::vector<MetricReport> folds;
  std::vector<std::size_t> fold_sizes;
  /// fold index of every sample
  std::vector<std::size_t> assignment;
  double mean_r = 0.0;
  double mean_rmse = 0.0;
};

/// Seeded shuffle, then k contiguous near-equal slices of the permutation.
inline std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DomainError("kfold: k must be >= 2");
  if (k > n) throw DomainError("kfold: k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "nn.kfold"));
  deterministic_shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold(n);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * n / k;
    const std::size_t end = (f + 1) * n / k;
    for (std::size_t i = begin; i < end; ++i) fold[perm[i]] = f;
  }
  return fold;
}

/// Trains on k-1 folds and scores the held-out fold, for every fold. Folds may
/// train concurrently; each uses a seed derived from (cfg.rng_seed, fold).
inline FoldReport kfold_cv(const Dataset& data, const MlpSpec& spec, const TrainConfig& cfg, std::size_t k = 10,
                           unsigned threads = 0) {
  if (data.targets.cols != 1) throw ShapeError("kfold_cv: single-output regression only");
  FoldReport rep;
  rep.k = k;
  rep.assignment = kfold_assignment(data.size(), k, cfg.rng_seed);
  rep.folds.resize(k);
  rep.fold_sizes.assign(k, 0);
  for (auto f : rep.assignment) ++rep.fold_sizes[f];

  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (rep.assignment[i] == f ? test_idx : train_idx).push_back(i);
    TrainConfig fold_cfg = cfg;
    fold_cfg.rng_seed = derive_seed(cfg.rng_seed, "nn.fold", f);
    const auto trained = train(data.subset(train_idx), spec, fold_cfg);
    const Dataset test = data.subset(test_idx);
    const auto pred = trained.model.predict_column(test.features);
    std::vector<double> truth(test.targets.data.begin(), test.targets.data.end());
    MetricReport m;
    m.n = truth.size();
    m.rmse = rmse(truth, pred);
    try {
      m.pearson_r = pearson_r(truth, pred);
    } catch (const DomainError&) {
      m.pearson_r = std::numeric_limits<double>::quiet_NaN();
    }
    rep.folds[f] = m;
  };

  unsigned n_threads = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, k));
  if (n_threads <= 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    for (std::size_t first = 0; first < k; first += n_threads) {
      std::vector<std::thread> pool;
      for (std::size_t f = first; f < std::min<std::size_t>(k, first + n_threads); ++f) pool.emplace_back(run_fold, f);
      for (auto& t : pool) t.join();
    }
  }
  for (const auto& m : rep.folds) {
    rep.mean_r += m.pearson_r;
    rep.mean_rmse += m.rmse;
  }
  rep.mean_r /= static_cast<double>(k);
  rep.mean_rmse /= static_cast<double>(k);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------
inline constexpr const char* kModelFormat = "latentgen.mlp";
inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const TrainedModel& model) {
  using nlohmann::json;
  const auto& spec = model.net.spec();
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["seed"] = model.seed;
  j["spec"] = {{"input_dim", spec.input_dim},
               {"hidden", spec.hidden},
               {"activation", to_string(spec.activation)},
               {"output_dim", spec.output_dim}};
  auto scaler = [](const Standardizer& s) -> json {
    if (!s.active()) return nullptr;
    return {{"mean", s.mean}, {"scale", s.scale}};
  };
  j["feature_scaler"] = scaler(model.feature_scaler);
  j["target_scaler"] = scaler(model.target_scaler);
  j["layers"] = json::array();
  for (const auto& l : model.net.layers()) {
    j["layers"].push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("model: unknown format");
    if (j.at("version").get<int>() != kModelFormatVersion) throw DataError("model: unsupported version");
    MlpSpec spec;
    const auto& s = j.at("spec");
    spec.input_dim = s.at("input_dim").get<std::size_t>();
    spec.hidden = s.at("hidden").get<std::vector<std::size_t>>();
    spec.activation = activation_from_string(s.at("activation").get<std::string>());
    spec.output_dim = s.at("output_dim").get<std::size_t>();
    TrainedModel model{Mlp(spec), {}, {}, j.at("seed").get<std::uint64_t>()};
    auto& layers = model.net.layers();
    const auto& jl = j.at("layers");
    if (jl.size() != layers.size()) throw DataError("model: layer count does not match spec");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto w = jl[l].at("weights").get<std::vector<double>>();
      auto b = jl[l].at("bias").get<std::vector<double>>();
      if (w.size() != layers[l].weights.size() || b.size() != layers[l].bias.size()) {
        throw DataError("model: layer " + std::to_string(l) + " shape does not match spec");
      }
      layers[l].weights = std::move(w);
      layers[l].bias = std::move(b);
    }
    auto scaler = [](const nlohmann::json& js, std::size_t dim) {
      Standardizer s;
      if (js.is_null()) return s;
      s.mean = js.at("mean").get<std::vector<double>>();
      s.scale = js.at("scale").get<std::vector<double>>();
      if (s.mean.size() != dim || s.scale.size() != dim) throw DataError("model: scaler dimension mismatch");
      return s;
    };
    model.feature_scaler = scaler(j.at("feature_scaler"), spec.input_dim);
    model.target_scaler = scaler(j.at("target_scaler"), spec.output_dim);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  }
}

inline void save_model(const TrainedModel& model, const std::string& path) {
  csv::write_file(path, to_json(model).dump(1) + "\n");
}

inline TrainedModel load_model(const std::string& path) {
  try {
    return model_from_json(nlohmann::json::parse(csv::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline std::string format_loss_csv(const std::vector<double>& losses) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << (i + 1) << ',' << csv::format_double(losses[i]) << '\n';
  return out.str();
}

/// A fixed affine predictor y = w.x + b expressed as a zero-hidden-layer network.
inline TrainedModel linear_model(std::span<const double> w, double b) {
  MlpSpec spec;
  spec.input_dim = w.size();
  spec.hidden = {};
  spec.output_dim = 1;
  TrainedModel m{Mlp(spec), {}, {}, 0};
  auto& layer = m.net.layers()[0];
  std::copy(w.begin(), w.end(), layer.weights.begin());
  layer.bias[0] = b;
  return m;
}

}  // namespace latentgen::nn
