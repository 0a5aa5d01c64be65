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

// Latent codecs: SMILES <-> LatentVector. FileBackedCodec serves vectors
// exported from an external encoder; ToyAutoencoder is a small dense
// autoencoder over one-hot character sequences, trained in-process.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/latent_io.hpp"
#include "latentgen/neuralnet.hpp"
#include "latentgen/smiles.hpp"

namespace latentgen::codec {

class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual LatentVector encode(std::string_view smiles) const = 0;
  virtual std::string decode(const LatentVector& v) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::string kind() const = 0;
  virtual std::string provenance() const = 0;
};

// ---------------------------------------------------------------------------
// File-backed codec
// ---------------------------------------------------------------------------
enum class DecodePolicy { Cosine, Euclidean };

struct Neighbor {
  std::size_t index = 0;
  /// cosine similarity, or negated Euclidean distance, so larger is closer
  double score = 0.0;
};

class FileBackedCodec : public LatentCodec {
 public:
  FileBackedCodec(std::vector<std::string> ids, std::vector<std::string> smiles, std::vector<LatentVector> vectors,
                  std::string provenance = "in-memory", DecodePolicy policy = DecodePolicy::Cosine)
      : ids_(std::move(ids)),
        smiles_(std::move(smiles)),
        vectors_(std::move(vectors)),
        provenance_(std::move(provenance)),
        policy_(policy) {
    if (vectors_.empty()) throw DataError("FileBackedCodec: empty table");
    require_same_dim(ids_.size(), vectors_.size(), "FileBackedCodec ids");
    require_same_dim(smiles_.size(), vectors_.size(), "FileBackedCodec smiles");
    dim_ = vectors_.front().dim();
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      require_same_dim(vectors_[i].dim(), dim_, "FileBackedCodec");
      require_finite(vectors_[i], "FileBackedCodec");
      const double n = norm(vectors_[i].span());
      if (policy_ == DecodePolicy::Cosine && n == 0.0) {
        throw DataError("FileBackedCodec: zero vector for id '" + ids_[i] + "'");
      }
      norms_.push_back(n);
      index_.emplace(smiles_[i], i);  // first occurrence wins
    }
  }

  /// Loads `id,v0..` plus the `id,smiles` sidecar; rows are kept in latent-file order.
  static FileBackedCodec from_files(const std::string& latent_csv, const std::string& smiles_csv,
                                    DecodePolicy policy = DecodePolicy::Cosine) {
    auto table = read_latent_csv(latent_csv);
    const auto mapping = read_id_smiles_csv(smiles_csv);
    std::vector<std::string> smiles;
    for (const auto& id : table.ids) {
      auto it = mapping.find(id);
      if (it == mapping.end()) throw DataError(smiles_csv + ": no SMILES for id '" + id + "'");
      smiles.push_back(it->second);
    }
    return FileBackedCodec(std::move(table.ids), std::move(smiles), std::move(table.vectors), latent_csv, policy);
  }

  LatentVector encode(std::string_view smiles) const override {
    auto it = index_.find(std::string(smiles));
    if (it == index_.end()) throw LookupError("FileBackedCodec: SMILES not in table: " + std::string(smiles));
    return vectors_[it->second];
  }

  std::string decode(const LatentVector& v) const override { return smiles_[nearest(v).index]; }

  /// Closest table row; ties resolve to the earliest row.
  Neighbor nearest(const LatentVector& v) const {
    require_same_dim(v.dim(), dim_, "FileBackedCodec::decode");
    Neighbor best{0, -std::numeric_limits<double>::infinity()};
    if (policy_ == DecodePolicy::Cosine) {
      const double nv = norm(v.span());
      if (nv == 0.0) throw DomainError("FileBackedCodec::decode: zero vector under cosine policy");
      for (std::size_t i = 0; i < vectors_.size(); ++i) {
        const double s = dot(v.span(), vectors_[i].span()) / (nv * norms_[i]);
        if (s > best.score) best = {i, s};
      }
    } else {
      for (std::size_t i = 0; i < vectors_.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) d2 += (v[j] - vectors_[i][j]) * (v[j] - vectors_[i][j]);
        const double s = -std::sqrt(d2);
        if (s > best.score) best = {i, s};
      }
    }
    return best;
  }

  std::size_t dim() const override { return dim_; }
  std::string kind() const override { return "file"; }
  std::string provenance() const override { return provenance_; }
  DecodePolicy policy() const noexcept { return policy_; }

  std::size_t size() const noexcept { return vectors_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::string>& smiles() const noexcept { return smiles_; }
  const std::vector<LatentVector>& vectors() const noexcept { return vectors_; }

  std::optional<std::size_t> find_id(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
      if (ids_[i] == id) return i;
    return std::nullopt;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> smiles_;
  std::vector<LatentVector> vectors_;
  std::vector<double> norms_;
  std::map<std::string, std::size_t> index_;
  std::string provenance_;
  DecodePolicy policy_;
  std::size_t dim_ = 0;
};

// ---------------------------------------------------------------------------
// Toy autoencoder
// ---------------------------------------------------------------------------

/// Character vocabulary; index 0 is padding.
class Tokenizer {
 public:
  static constexpr char kPad = ' ';
  static constexpr std::string_view kAlphabet = " #%()+-./0123456789=@BCFHIKLMNOPSZ[\\]abcegilnorsu";

  explicit Tokenizer(std::size_t max_len) : max_len_(max_len) {
    if (max_len_ == 0) throw ConfigError("Tokenizer: max length must be positive");
  }

  std::size_t max_len() const noexcept { return max_len_; }
  std::size_t vocab_size() const noexcept { return kAlphabet.size(); }
  std::size_t width() const noexcept { return max_len_ * vocab_size(); }

  std::vector<std::size_t> tokens(std::string_view smiles) const {
    if (smiles.size() > max_len_) {
      throw CapacityError("Tokenizer: SMILES longer than " + std::to_string(max_len_) + " characters");
    }
    std::vector<std::size_t> out(max_len_, 0);
    for (std::size_t i = 0; i < smiles.size(); ++i) {
      const auto k = kAlphabet.find(smiles[i]);
      if (k == std::string_view::npos || k == 0) {
        throw DataError(std::string("Tokenizer: character '") + smiles[i] + "' not in vocabulary");
      }
      out[i] = k;
    }
    return out;
  }

  void one_hot(std::string_view smiles, double* row) const {
    std::fill(row, row + width(), 0.0);
    const auto t = tokens(smiles);
    for (std::size_t i = 0; i < max_len_; ++i) row[i * vocab_size() + t[i]] = 1.0;
  }

  /// Argmax per position; decoding stops at the first padding token.
  std::string from_scores(const double* row) const {
    std::string out;
    const std::size_t v = vocab_size();
    for (std::size_t i = 0; i < max_len_; ++i) {
      const double* s = row + i * v;
      const auto k = static_cast<std::size_t>(std::max_element(s, s + v) - s);
      if (k == 0) break;
      out.push_back(kAlphabet[k]);
    }
    return out;
  }

 private:
  std::size_t max_len_;
};

struct ToyConfig {
  std::size_t max_len = 24;
  std::size_t latent_dim = 32;
  std::size_t hidden = 96;
  nn::TrainConfig train = default_train();

  static nn::TrainConfig default_train() {
    nn::TrainConfig t;
    t.epochs = 400;
    t.lr_schedule = {{1, 2e-3}, {301, 5e-4}};
    t.batch_size = 16;
    t.standardize_features = false;
    t.standardize_targets = false;
    return t;
  }
};

class ToyAutoencoder : public LatentCodec {
 public:
  /// Layers: one-hot -> hidden -> latent (encoder) -> hidden -> one-hot scores (decoder).
  static constexpr std::size_t kEncoderLayers = 2;

  ToyAutoencoder(Tokenizer tokenizer, nn::Mlp net, std::string provenance = "toy")
      : tokenizer_(std::move(tokenizer)), net_(std::move(net)), provenance_(std::move(provenance)) {
    if (net_.layers().size() != 4 || net_.spec().input_dim != tokenizer_.width() ||
        net_.spec().output_dim != tokenizer_.width()) {
      throw ConfigError("ToyAutoencoder: network shape does not match tokenizer");
    }
  }

  static nn::MlpSpec spec_for(const ToyConfig& cfg) {
    const Tokenizer tok(cfg.max_len);
    nn::MlpSpec spec;
    spec.input_dim = tok.width();
    spec.hidden = {cfg.hidden, cfg.latent_dim, cfg.hidden};
    spec.activation = nn::Activation::Tanh;
    spec.output_dim = tok.width();
    return spec;
  }

  /// Trains on `corpus` (MSE on one-hot reconstruction). Returns the codec and
  /// the per-epoch loss history through `loss_history` when given.
  static ToyAutoencoder train(const std::vector<std::string>& corpus, const ToyConfig& cfg,
                              std::vector<double>* loss_history = nullptr) {
    if (corpus.empty()) throw DomainError("ToyAutoencoder::train: empty corpus");
    const Tokenizer tok(cfg.max_len);
    nn::Matrix x(corpus.size(), tok.width());
    for (std::size_t i = 0; i < corpus.size(); ++i) tok.one_hot(corpus[i], x.row(i));
    nn::Dataset data{x, x};
    nn::TrainConfig tc = cfg.train;
    tc.standardize_features = false;
    tc.standardize_targets = false;
    auto result = nn::train(data, spec_for(cfg), tc);
    if (loss_history) *loss_history = result.loss_history;
    return ToyAutoencoder(tok, std::move(result.model.net), "toy:trained");
  }

  LatentVector encode(std::string_view smiles) const override {
    nn::Matrix x(1, tokenizer_.width());
    tokenizer_.one_hot(smiles, x.row(0));
    const auto z = net_.forward_range(x, 0, kEncoderLayers);
    return LatentVector(std::vector<double>(z.data.begin(), z.data.end()));
  }

  std::string decode(const LatentVector& v) const override {
    require_same_dim(v.dim(), dim(), "ToyAutoencoder::decode");
    nn::Matrix z(1, v.dim());
    std::copy(v.begin(), v.end(), z.row(0));
    const auto scores = net_.forward_range(z, kEncoderLayers, net_.layers().size());
    return tokenizer_.from_scores(scores.row(0));
  }

  std::size_t dim() const override { return net_.spec().hidden[1]; }
  std::string kind() const override { return "toy"; }
  std::string provenance() const override { return provenance_; }

  const Tokenizer& tokenizer() const noexcept { return tokenizer_; }
  const nn::Mlp& network() const noexcept { return net_; }

  /// Stored with the neuralnet parameter format plus a tokenizer length field.
  void save(const std::string& path) const {
    auto j = nn::to_json(nn::TrainedModel{net_, {}, {}, 0});
    j["toy_max_len"] = tokenizer_.max_len();
    csv::write_file(path, j.dump(1) + "\n");
  }

  static ToyAutoencoder load(const std::string& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(csv::read_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    if (!j.contains("toy_max_len")) throw DataError(path + ": not a toy autoencoder file");
    auto model = nn::model_from_json(j);
    return ToyAutoencoder(Tokenizer(j["toy_max_len"].get<std::size_t>()), std::move(model.net), path);
  }

 private:
  Tokenizer tokenizer_;
  nn::Mlp net_;
  std::string provenance_;
};

// ---------------------------------------------------------------------------
// Reconstruction rate
// ---------------------------------------------------------------------------
struct ReconstructionFailure {
  std::string smiles;
  std::string decoded;  // empty when the entry could not be encoded
  std::string reason;
};

struct ReconstructionReport {
  std::size_t n_total = 0;
  std::size_t n_encodable = 0;
  std::size_t n_exact = 0;
  /// n_exact / n_encodable; empty ("undefined") when nothing was encodable.
  std::optional<double> rate;
  std::vector<ReconstructionFailure> failures;
};

inline ReconstructionReport reconstruction_rate(const LatentCodec& codec, const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw DomainError("reconstruction_rate: empty corpus");
  ReconstructionReport rep;
  rep.n_total = corpus.size();
  for (const auto& s : corpus) {
    LatentVector v;
    try {
      v = codec.encode(s);
    } catch (const Error& e) {
      rep.failures.push_back({s, "", std::string("unencodable: ") + e.what()});
      continue;
    }
    ++rep.n_encodable;
    const auto back = codec.decode(v);
    if (back == s) {
      ++rep.n_exact;
    } else {
      rep.failures.push_back({s, back, "mismatch"});
    }
  }
  if (rep.n_encodable > 0) rep.rate = static_cast<double>(rep.n_exact) / static_cast<double>(rep.n_encodable);
  return rep;
}

// ---------------------------------------------------------------------------
// Latent distribution checks
// ---------------------------------------------------------------------------

/// Per-index mean of |v_i| over a set of vectors.
inline std::vector<double> mean_abs_profile(const std::vector<LatentVector>& vectors) {
  if (vectors.empty()) throw DomainError("mean_abs_profile: no vectors");
  const std::size_t d = vectors.front().dim();
  std::vector<double> out(d, 0.0);
  for (const auto& v : vectors) {
    require_same_dim(v.dim(), d, "mean_abs_profile");
    for (std::size_t i = 0; i < d; ++i) out[i] += std::abs(v[i]);
  }
  for (double& x : out) x /= static_cast<double>(vectors.size());
  return out;
}

struct ProfileCheck {
  double gap = 0.0;  // L-infinity distance between profiles
  std::size_t worst_index = 0;
  double threshold = 0.0;
  bool warn = false;
};

inline ProfileCheck compare_profiles(const std::vector<double>& reference, const std::vector<double>& candidate,
                                     double threshold) {
  require_same_dim(reference.size(), candidate.size(), "compare_profiles");
  ProfileCheck c;
  c.threshold = threshold;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double g = std::abs(reference[i] - candidate[i]);
    if (g > c.gap) {
      c.gap = g;
      c.worst_index = i;
    }
  }
  c.warn = c.gap > threshold;
  return c;
}

/// Centroid and radius statistics of a latent cloud.
struct HullStats {
  LatentVector centroid;
  double mean_radius = 0.0;
  double max_radius = 0.0;

  static HullStats of(const std::vector<LatentVector>& vectors) {
    if (vectors.empty()) throw DomainError("HullStats: no vectors");
    HullStats h;
    const std::size_t d = vectors.front().dim();
    h.centroid = LatentVector(d, 0.0);
    for (const auto& v : vectors)
      for (std::size_t i = 0; i < d; ++i) h.centroid[i] += v[i] / static_cast<double>(vectors.size());
    for (const auto& v : vectors) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) r2 += (v[i] - h.centroid[i]) * (v[i] - h.centroid[i]);
      const double r = std::sqrt(r2);
      h.mean_radius += r / static_cast<double>(vectors.size());
      h.max_radius = std::max(h.max_radius, r);
    }
    return h;
  }

  double distance(const LatentVector& v) const {
    require_same_dim(v.dim(), centroid.dim(), "HullStats::distance");
    double r2 = 0.0;
    for (std::size_t i = 0; i < v.dim(); ++i) r2 += (v[i] - centroid[i]) * (v[i] - centroid[i]);
    return std::sqrt(r2);
  }
};

struct ReencodeCheck {
  std::size_t n = 0;
  std::size_t outside = 0;  // farther from the centroid than slack * max_radius
  bool warn = false;
};

/// encode(decode(v)) for each generated v, compared against the radius of the
/// training latents.
inline ReencodeCheck reencode_check(const LatentCodec& codec, const std::vector<LatentVector>& generated,
                                    const HullStats& training, double slack = 1.0) {
  ReencodeCheck c;
  for (const auto& v : generated) {
    ++c.n;
    LatentVector re;
    try {
      re = codec.encode(codec.decode(v));
    } catch (const Error&) {
      ++c.outside;
      continue;
    }
    if (training.distance(re) > slack * training.max_radius) ++c.outside;
  }
  c.warn = c.outside > 0;
  return c;
}

}  // namespace latentgen::codec
