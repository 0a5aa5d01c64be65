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

// End-to-end orchestration: dataset ingestion, predictor training, the
// generate -> decode -> dedupe -> predict -> screen funnel, the validation
// loop and the Fokker-Planck cross-check, plus their reports.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "latentgen/codec.hpp"
#include "latentgen/config.hpp"
#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"
#include "latentgen/fokker_planck.hpp"
#include "latentgen/latent_io.hpp"
#include "latentgen/neuralnet.hpp"
#include "latentgen/random.hpp"
#include "latentgen/screen.hpp"
#include "latentgen/sde.hpp"
#include "latentgen/smiles.hpp"

namespace latentgen::pipeline {

using nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const InvariantError*>(&e)) return kExitInternal;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  return kExitInternal;
}

// ---------------------------------------------------------------------------
// Dataset ingestion
// ---------------------------------------------------------------------------
enum class LabelUnit { DeltaG, KiMolar, KiMicromolar, IC50Molar, IC50Micromolar };

inline std::string to_string(LabelUnit u) {
  switch (u) {
    case LabelUnit::DeltaG: return "deltag";
    case LabelUnit::KiMolar: return "ki_m";
    case LabelUnit::KiMicromolar: return "ki_um";
    case LabelUnit::IC50Molar: return "ic50_m";
    default: return "ic50_um";
  }
}

inline LabelUnit label_unit_from_string(const std::string& s) {
  for (auto u : {LabelUnit::DeltaG, LabelUnit::KiMolar, LabelUnit::KiMicromolar, LabelUnit::IC50Molar,
                 LabelUnit::IC50Micromolar})
    if (to_string(u) == s) return u;
  throw ConfigError("unknown label unit '" + s + "' (expected deltag, ki_m, ki_um, ic50_m or ic50_um)");
}

/// Converts a raw label to dG in kcal/mol.
inline double label_to_delta_g(double value, LabelUnit unit) {
  switch (unit) {
    case LabelUnit::DeltaG: return value;
    case LabelUnit::KiMolar: return ki_to_delta_g(value);
    case LabelUnit::KiMicromolar: return ki_to_delta_g(micromolar_to_molar(value));
    case LabelUnit::IC50Molar: return ki_to_delta_g(ic50_to_ki(value));
    default: return ki_to_delta_g(ic50_to_ki(micromolar_to_molar(value)));
  }
}

inline SourceMeasure source_measure_of(LabelUnit u) {
  switch (u) {
    case LabelUnit::DeltaG: return SourceMeasure::DeltaG;
    case LabelUnit::KiMolar:
    case LabelUnit::KiMicromolar: return SourceMeasure::Ki;
    default: return SourceMeasure::IC50;
  }
}

struct IngestReport {
  std::string source;
  std::vector<AffinityRecord> records;
  std::size_t n_rows = 0;
  std::vector<std::string> dropped;  // one entry per unparseable row
  std::vector<std::string> warnings;

  std::size_t n_dropped() const noexcept { return dropped.size(); }
};

inline IngestReport ingest_table(const csv::Table& t, const std::string& source, LabelUnit unit) {
  if (t.header != std::vector<std::string>{"smiles", "label"})
    throw DataError(source + ": dataset header must be 'smiles,label'");
  IngestReport rep;
  rep.source = source;
  rep.n_rows = t.rows.size();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string at = csv::where(t, r, source);
    const auto& smi = t.rows[r][0];
    const double raw = csv::parse_double(t.rows[r][1], at);
    if (!std::isfinite(raw)) throw DataError(at + ": label must be a finite number");
    double dg = 0.0;
    try {
      dg = label_to_delta_g(raw, unit);
    } catch (const DomainError& e) {
      throw DataError(at + ": " + e.what());
    }
    if (!smiles::is_parseable(smi)) {
      rep.dropped.push_back(at + ": unparseable SMILES '" + smi + "'");
      continue;
    }
    if (dg > 0.0) rep.warnings.push_back(at + ": positive dG " + csv::format_double(dg) + " kcal/mol kept as given");
    rep.records.push_back({smi, dg, source_measure_of(unit)});
  }
  return rep;
}

inline IngestReport ingest_dataset(const std::string& path, LabelUnit unit) {
  return ingest_table(csv::read_file(path), path, unit);
}

/// The `smiles` column of any CSV.
inline std::vector<std::string> read_smiles_column(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto col = t.column("smiles");
  if (col < 0) throw DataError(path + ": no 'smiles' column");
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row[static_cast<std::size_t>(col)]);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------
enum class CodecKind { File, Toy };

struct DatasetSpec {
  std::string path;  // empty when not configured
  LabelUnit unit = LabelUnit::DeltaG;
};

struct FpCheckConfig {
  double alpha = 1.0;
  double sigma = 1.0;
  double x_ref = 0.0;
  double x0 = 0.0;
  double t_end = 10.0;
  double dt = 1e-3;
  double dt_pde = 0.0;  // 0 picks 90% of the stability limit
  std::size_t n_trajectories = 100000;
  std::size_t cells = 400;
  double half_width = 0.0;  // 0 covers 8 stationary sd plus |x0 - x_ref|
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void validate() const {
    if (!(alpha > 0.0) || !(sigma > 0.0)) throw ConfigError("fp: alpha and sigma must be > 0");
    if (!(t_end > 0.0) || !(dt > 0.0)) throw ConfigError("fp: t_end and dt must be > 0");
    if (n_trajectories < fp::kMinComparisonSamples)
      throw ConfigError("fp: n_trajectories must be at least " + std::to_string(fp::kMinComparisonSamples));
    if (cells < 10) throw ConfigError("fp: need at least 10 cells");
    if (half_width < 0.0) throw ConfigError("fp: half_width must be >= 0");
  }
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::vector<screen::Target> targets{screen::kTargets.begin(), screen::kTargets.end()};
  std::array<DatasetSpec, screen::kTargetCount> datasets;
  std::array<std::string, screen::kTargetCount> predictor_models;

  CodecKind codec_kind = CodecKind::File;
  std::string codec_latents;
  std::string codec_smiles;
  std::string codec_model;
  codec::DecodePolicy decode_policy = codec::DecodePolicy::Cosine;
  codec::ToyConfig toy;

  std::string properties_path;

  std::vector<std::string> reference_ids;
  std::vector<std::string> reference_smiles;
  std::vector<double> reference_weights;
  std::string start_id;
  std::string start_smiles;

  sde::LangevinConfig langevin;
  std::size_t n_trajectories = 1000;
  unsigned threads = 0;
  bool write_latents = false;

  nn::MlpSpec mlp;
  nn::TrainConfig train;
  std::size_t cv_folds = 10;

  screen::ScreenOptions screen;
  double reference_gate = screen::kReferenceSimilarityGate;
  bool enforce_reference_gate = true;

  std::string corpus_path;
  double profile_threshold = 0.1;
  double reencode_slack = 1.0;

  FpCheckConfig fp;

  bool has_dataset(screen::Target t) const { return !datasets[static_cast<std::size_t>(t)].path.empty(); }

  std::uint64_t generation_seed() const { return derive_seed(seed, "pipeline.generate"); }
  std::uint64_t train_seed(screen::Target t) const {
    return derive_seed(seed, "pipeline.train", static_cast<std::uint64_t>(t));
  }
  std::uint64_t codec_seed() const { return derive_seed(seed, "pipeline.codec"); }
  std::uint64_t fp_seed() const { return derive_seed(seed, "pipeline.fp"); }

  /// Reads every recognised key; unknown keys are an error.
  static PipelineConfig from_config(const Config& c) {
    PipelineConfig p;
    p.seed = c.get_u64("seed", 0);

    if (c.has("targets")) {
      p.targets.clear();
      for (const auto& t : c.get_list("targets")) p.targets.push_back(screen::target_from_string(t));
      if (p.targets.empty()) throw ConfigError("targets: list is empty");
    }
    for (std::size_t i = 0; i < screen::kTargetCount; ++i) {
      const std::string t(screen::kTargetNames[i]);
      p.datasets[i].path = c.get_path("data." + t + ".path");
      p.datasets[i].unit = label_unit_from_string(c.get_string("data." + t + ".unit", "deltag"));
      p.predictor_models[i] = c.get_path("predictor." + t + ".model");
    }

    const auto kind = c.get_string("codec.kind", "file");
    if (kind == "file") p.codec_kind = CodecKind::File;
    else if (kind == "toy") p.codec_kind = CodecKind::Toy;
    else throw ConfigError("codec.kind must be 'file' or 'toy', got '" + kind + "'");
    p.codec_latents = c.get_path("codec.latents");
    p.codec_smiles = c.get_path("codec.smiles");
    p.codec_model = c.get_path("codec.model");
    const auto policy = c.get_string("codec.policy", "cosine");
    if (policy == "cosine") p.decode_policy = codec::DecodePolicy::Cosine;
    else if (policy == "euclidean") p.decode_policy = codec::DecodePolicy::Euclidean;
    else throw ConfigError("codec.policy must be 'cosine' or 'euclidean', got '" + policy + "'");
    p.toy.max_len = c.get_size("codec.toy.max_len", p.toy.max_len);
    p.toy.latent_dim = c.get_size("codec.toy.latent_dim", p.toy.latent_dim);
    p.toy.hidden = c.get_size("codec.toy.hidden", p.toy.hidden);
    p.toy.train.epochs = c.get_size("codec.toy.epochs", p.toy.train.epochs);
    if (p.toy.train.lr_schedule.back().first_epoch > p.toy.train.epochs) p.toy.train.lr_schedule.resize(1);

    p.properties_path = c.get_path("properties.path");

    p.reference_ids = c.get_list("references.ids");
    p.reference_smiles = c.get_list("references.smiles");
    p.reference_weights = c.get_double_list("references.weights");
    p.start_id = c.get_string("generation.start_id");
    p.start_smiles = c.get_string("generation.start_smiles");
    p.n_trajectories = c.get_size("generation.n_trajectories", p.n_trajectories);
    p.threads = static_cast<unsigned>(c.get_size("generation.threads", 0));
    p.write_latents = c.get_bool("generation.write_latents", false);

    p.langevin.alpha = c.get_double("langevin.alpha", p.langevin.alpha);
    p.langevin.dt = c.get_double("langevin.dt", p.langevin.dt);
    p.langevin.n_steps = c.get_size("langevin.n_steps", p.langevin.n_steps);
    p.langevin.noise_sigma = c.get_double("langevin.noise_sigma", p.langevin.noise_sigma);
    p.langevin.noise_clamp = c.get_double("langevin.noise_clamp", p.langevin.noise_clamp);

    if (c.has("predictor.hidden")) p.mlp.hidden = c.get_size_list("predictor.hidden");
    else c.get_list("predictor.hidden");
    p.mlp.activation = nn::activation_from_string(c.get_string("predictor.activation", "relu"));
    p.train.epochs = c.get_size("predictor.epochs", p.train.epochs);
    p.train.batch_size = c.get_size("predictor.batch_size", p.train.batch_size);
    const auto lrs = c.get_double_list("predictor.lr");
    const auto lr_epochs = c.get_size_list("predictor.lr_epochs");
    if (!lrs.empty() || !lr_epochs.empty()) {
      if (lrs.size() != lr_epochs.size())
        throw ConfigError("predictor.lr and predictor.lr_epochs must have the same length");
      p.train.lr_schedule.clear();
      for (std::size_t i = 0; i < lrs.size(); ++i) p.train.lr_schedule.push_back({lr_epochs[i], lrs[i]});
    }
    p.train.standardize_features = c.get_bool("predictor.standardize_features", true);
    p.train.standardize_targets = c.get_bool("predictor.standardize_targets", true);
    p.cv_folds = c.get_size("predictor.cv_folds", p.cv_folds);

    p.screen.thresholds.active_cutoff = c.get_double("screen.active_cutoff", p.screen.thresholds.active_cutoff);
    p.screen.thresholds.herg_cutoff = c.get_double("screen.herg_cutoff", p.screen.thresholds.herg_cutoff);
    p.screen.novelty_threshold = c.get_double("screen.novelty_threshold", p.screen.novelty_threshold);
    p.screen.require_lipinski = c.get_bool("screen.require_lipinski", true);
    p.screen.require_properties = c.get_bool("screen.require_properties", true);
    p.screen.require_novelty = c.get_bool("screen.require_novelty", true);
    p.reference_gate = c.get_double("screen.reference_gate", p.reference_gate);
    p.enforce_reference_gate = c.get_bool("screen.enforce_reference_gate", true);

    p.corpus_path = c.get_path("validate.corpus");
    p.profile_threshold = c.get_double("validate.profile_threshold", p.profile_threshold);
    p.reencode_slack = c.get_double("validate.reencode_slack", p.reencode_slack);

    p.fp.alpha = c.get_double("fp.alpha", p.fp.alpha);
    p.fp.sigma = c.get_double("fp.sigma", p.fp.sigma);
    p.fp.x_ref = c.get_double("fp.x_ref", p.fp.x_ref);
    p.fp.x0 = c.get_double("fp.x0", p.fp.x0);
    p.fp.t_end = c.get_double("fp.t_end", p.fp.t_end);
    p.fp.dt = c.get_double("fp.dt", p.fp.dt);
    p.fp.dt_pde = c.get_double("fp.dt_pde", p.fp.dt_pde);
    p.fp.n_trajectories = c.get_size("fp.n_trajectories", p.fp.n_trajectories);
    p.fp.cells = c.get_size("fp.cells", p.fp.cells);
    p.fp.half_width = c.get_double("fp.half_width", p.fp.half_width);
    p.fp.threads = p.threads;

    c.reject_unused();
    p.fp.seed = p.fp_seed();
    p.langevin.rng_seed = p.generation_seed();
    p.validate();
    return p;
  }

  void validate() const {
    langevin.validate();
    screen.thresholds.validate();
    if (n_trajectories == 0) throw ConfigError("generation.n_trajectories must be positive");
    if (!reference_ids.empty() && !reference_smiles.empty())
      throw ConfigError("give references.ids or references.smiles, not both");
    const std::size_t n_refs = reference_ids.size() + reference_smiles.size();
    if (!reference_weights.empty() && reference_weights.size() != n_refs)
      throw ConfigError("references.weights must list one weight per reference");
    if (!start_id.empty() && !start_smiles.empty())
      throw ConfigError("give generation.start_id or generation.start_smiles, not both");
    if (!(profile_threshold > 0.0)) throw ConfigError("validate.profile_threshold must be > 0");
    if (!(reencode_slack > 0.0)) throw ConfigError("validate.reencode_slack must be > 0");
    if (cv_folds < 2) throw ConfigError("predictor.cv_folds must be >= 2");
    std::vector<bool> seen(screen::kTargetCount, false);
    for (auto t : targets) {
      if (seen[static_cast<std::size_t>(t)]) throw ConfigError("targets: duplicate entry");
      seen[static_cast<std::size_t>(t)] = true;
    }
    auto must_exist = [](const std::string& path, const char* key) {
      if (!path.empty() && !std::filesystem::exists(path))
        throw ConfigError(std::string(key) + ": file '" + path + "' does not exist");
    };
    for (std::size_t i = 0; i < screen::kTargetCount; ++i) must_exist(datasets[i].path, "data.<target>.path");
    must_exist(codec_latents, "codec.latents");
    must_exist(codec_smiles, "codec.smiles");
    must_exist(properties_path, "properties.path");
    must_exist(corpus_path, "validate.corpus");
    if (codec_kind == CodecKind::File && (codec_latents.empty() || codec_smiles.empty()))
      throw ConfigError("codec.kind = file needs codec.latents and codec.smiles");
    if (codec_kind == CodecKind::Toy && codec_model.empty())
      throw ConfigError("codec.kind = toy needs codec.model");
  }
};

inline PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  auto c = Config::load(path);
  for (const auto& o : overrides) c.apply_override(o);
  return PipelineConfig::from_config(c);
}

// ---------------------------------------------------------------------------
// Shared loading
// ---------------------------------------------------------------------------
inline std::unique_ptr<codec::LatentCodec> load_codec(const PipelineConfig& cfg) {
  if (cfg.codec_kind == CodecKind::File) {
    return std::make_unique<codec::FileBackedCodec>(
        codec::FileBackedCodec::from_files(cfg.codec_latents, cfg.codec_smiles, cfg.decode_policy));
  }
  if (!std::filesystem::exists(cfg.codec_model))
    throw ConfigError("codec.model '" + cfg.codec_model + "' does not exist (run `train --codec` first)");
  return std::make_unique<codec::ToyAutoencoder>(codec::ToyAutoencoder::load(cfg.codec_model));
}

inline std::optional<screen::PropertyTable> load_properties(const PipelineConfig& cfg) {
  if (cfg.properties_path.empty()) return std::nullopt;
  return screen::read_property_csv(cfg.properties_path);
}

/// Every SMILES from the configured datasets, deduplicated in file order.
inline std::vector<std::string> dataset_corpus(const PipelineConfig& cfg) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < screen::kTargetCount; ++i) {
    if (cfg.datasets[i].path.empty()) continue;
    for (const auto& r : ingest_dataset(cfg.datasets[i].path, cfg.datasets[i].unit).records)
      if (seen.insert(r.smiles).second) out.push_back(r.smiles);
  }
  return out;
}

struct EncodedDataset {
  IngestReport ingest;
  std::vector<std::string> smiles;
  std::vector<LatentVector> latents;
  std::vector<double> labels;
  std::vector<std::string> unencodable;
};

inline EncodedDataset encode_dataset(const PipelineConfig& cfg, const codec::LatentCodec& codec, screen::Target t) {
  const auto& spec = cfg.datasets[static_cast<std::size_t>(t)];
  if (spec.path.empty()) throw ConfigError("no dataset configured for target " + std::string(screen::to_string(t)));
  EncodedDataset out;
  out.ingest = ingest_dataset(spec.path, spec.unit);
  for (const auto& r : out.ingest.records) {
    try {
      out.latents.push_back(codec.encode(r.smiles));
    } catch (const DataError& e) {
      out.unencodable.push_back(r.smiles + ": " + e.what());
      continue;
    }
    out.smiles.push_back(r.smiles);
    out.labels.push_back(r.delta_g);
  }
  return out;
}

struct ResolvedReferences {
  std::vector<std::string> smiles;
  std::vector<LatentVector> vectors;
  std::vector<double> weights;  // normalized
  sde::ReferenceSet set;
  LatentVector start;
  std::string start_smiles;
};

inline ResolvedReferences resolve_references(const PipelineConfig& cfg, const codec::LatentCodec& codec) {
  const auto* table = dynamic_cast<const codec::FileBackedCodec*>(&codec);
  auto by_id = [&](const std::string& id) -> std::pair<std::string, LatentVector> {
    if (!table) throw ConfigError("reference ids need codec.kind = file; use SMILES instead");
    const auto idx = table->find_id(id);
    if (!idx) throw ConfigError("unknown latent id '" + id + "'");
    return {table->smiles()[*idx], table->vectors()[*idx]};
  };
  std::vector<std::string> smi;
  std::vector<LatentVector> vecs;
  for (const auto& id : cfg.reference_ids) {
    auto [s, v] = by_id(id);
    smi.push_back(s);
    vecs.push_back(v);
  }
  for (const auto& s : cfg.reference_smiles) {
    smi.push_back(s);
    vecs.push_back(codec.encode(s));
  }
  if (vecs.empty()) throw ConfigError("no references configured (references.ids or references.smiles)");
  auto weights = cfg.reference_weights;
  if (weights.empty()) weights.assign(vecs.size(), 1.0);
  auto set = sde::ReferenceSet::normalized(vecs, weights);
  ResolvedReferences r{smi, vecs, {}, set, {}, {}};
  for (const auto& ref : set.refs()) r.weights.push_back(ref.weight);
  if (!cfg.start_id.empty()) {
    auto [s, v] = by_id(cfg.start_id);
    r.start_smiles = s;
    r.start = v;
  } else if (!cfg.start_smiles.empty()) {
    r.start_smiles = cfg.start_smiles;
    r.start = codec.encode(cfg.start_smiles);
  } else {
    throw ConfigError("no starting molecule configured (generation.start_id or generation.start_smiles)");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------
struct TrainReport {
  screen::Target target = screen::Target::DAT;
  std::size_t n_rows = 0;
  std::size_t n_unparseable = 0;
  std::size_t n_unencodable = 0;
  std::size_t n_train = 0;
  nn::MlpSpec spec;
  nn::TrainConfig train;
  nn::TrainResult result;
  std::optional<nn::FoldReport> cv;
  std::vector<std::string> warnings;
};

inline TrainReport run_training(const PipelineConfig& cfg, const codec::LatentCodec& codec, screen::Target t,
                                bool with_cv) {
  const auto data = encode_dataset(cfg, codec, t);
  if (data.latents.size() < 2) throw DataError("target " + std::string(screen::to_string(t)) + ": fewer than two usable molecules");
  TrainReport rep;
  rep.target = t;
  rep.n_rows = data.ingest.n_rows;
  rep.n_unparseable = data.ingest.n_dropped();
  rep.n_unencodable = data.unencodable.size();
  rep.n_train = data.latents.size();
  rep.warnings = data.ingest.warnings;
  for (const auto& u : data.unencodable) rep.warnings.push_back("unencodable " + u);
  rep.spec = cfg.mlp;
  rep.spec.input_dim = codec.dim();
  rep.train = cfg.train;
  rep.train.rng_seed = cfg.train_seed(t);
  const auto ds = nn::Dataset::regression(nn::Matrix::from_rows(data.latents), data.labels);
  rep.result = nn::train(ds, rep.spec, rep.train);
  if (with_cv) rep.cv = nn::kfold_cv(ds, rep.spec, rep.train, cfg.cv_folds, cfg.threads);
  return rep;
}

inline ordered_json to_json(const TrainReport& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "train";
  j["target"] = std::string(screen::to_string(r.target));
  j["rows"] = r.n_rows;
  j["dropped_unparseable"] = r.n_unparseable;
  j["dropped_unencodable"] = r.n_unencodable;
  j["n_train"] = r.n_train;
  j["architecture"] = {{"input_dim", r.spec.input_dim},
                       {"hidden", r.spec.hidden},
                       {"activation", nn::to_string(r.spec.activation)},
                       {"output_dim", r.spec.output_dim}};
  ordered_json sched = ordered_json::array();
  for (const auto& ph : r.train.lr_schedule) sched.push_back({{"first_epoch", ph.first_epoch}, {"lr", ph.lr}});
  j["training"] = {{"epochs", r.train.epochs},
                   {"batch_size", r.train.batch_size},
                   {"lr_schedule", sched},
                   {"seed", r.train.rng_seed},
                   {"final_loss", r.result.loss_history.empty() ? 0.0 : r.result.loss_history.back()}};
  if (r.cv) {
    ordered_json folds = ordered_json::array();
    for (std::size_t f = 0; f < r.cv->k; ++f) {
      folds.push_back({{"fold", f},
                       {"n", r.cv->fold_sizes[f]},
                       {"pearson_r", screen::detail::number_or_null(r.cv->folds[f].pearson_r)},
                       {"rmse", r.cv->folds[f].rmse}});
    }
    j["cross_validation"] = {{"k", r.cv->k},
                             {"mean_pearson_r", screen::detail::number_or_null(r.cv->mean_r)},
                             {"mean_rmse", r.cv->mean_rmse},
                             {"folds", folds}};
  } else {
    j["cross_validation"] = nullptr;
  }
  j["warnings"] = r.warnings;
  return j;
}

using Predictors = std::array<std::optional<nn::TrainedModel>, screen::kTargetCount>;

/// Loads a stored model for every configured target, training in-run when only
/// a dataset is given. Targets with neither stay empty and predict NaN.
inline Predictors load_predictors(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                  std::vector<std::string>& warnings) {
  Predictors out;
  for (auto t : cfg.targets) {
    const auto i = static_cast<std::size_t>(t);
    const std::string name(screen::to_string(t));
    if (!cfg.predictor_models[i].empty()) {
      if (!std::filesystem::exists(cfg.predictor_models[i]))
        throw ConfigError("predictor." + name + ".model '" + cfg.predictor_models[i] + "' does not exist");
      out[i] = nn::load_model(cfg.predictor_models[i]);
      if (out[i]->net.spec().input_dim != codec.dim())
        throw ConfigError("predictor for " + name + " expects dimension " +
                          std::to_string(out[i]->net.spec().input_dim) + ", codec has " + std::to_string(codec.dim()));
    } else if (cfg.has_dataset(t)) {
      warnings.push_back("predictor for " + name + " trained in-run");
      out[i] = run_training(cfg, codec, t, false).result.model;
    } else {
      warnings.push_back("no predictor for " + name + "; its affinity stays indeterminate");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation funnel
// ---------------------------------------------------------------------------
inline constexpr std::array<const char*, 11> kDropReasons{
    "undecodable",   "duplicate",          "unparseable",  "unencodable", "affinity_fail", "affinity_indeterminate",
    "lipinski_fail", "lipinski_indeterminate", "properties_fail", "properties_missing", "not_novel"};

struct Stage {
  std::string name;
  std::size_t count = 0;
};

struct ReferenceInfo {
  std::string smiles;
  double weight = 0.0;
  std::optional<double> avg_similarity;  // against the configured datasets
  std::optional<bool> gate_pass;
};

struct GenerationResult {
  std::size_t generated = 0;
  std::string start_smiles;
  std::vector<ReferenceInfo> references;
  std::vector<Stage> stages;
  std::map<std::string, std::size_t> drops;
  std::vector<screen::CandidateVerdict> verdicts;  // unique, parseable, encodable molecules
  std::vector<std::string> funnel_exit;             // per verdict: drop reason or "survivor"
  std::vector<std::size_t> ranked;                  // verdict indices of the leads, best first
  std::vector<std::string> warnings;
  std::vector<LatentVector> finals;
  std::vector<std::string> decoded;  // per trajectory; empty string when undecodable

  std::size_t survivors() const { return ranked.size(); }

  std::vector<std::string> survivor_smiles() const {
    std::vector<std::string> out;
    for (auto i : ranked) out.push_back(verdicts[i].smiles);
    return out;
  }
};

/// Where a screened molecule leaves the funnel, or "survivor".
inline std::string funnel_exit(const screen::CandidateVerdict& v, const screen::ScreenOptions& opt) {
  if (v.affinity.status == Status::Fail) return "affinity_fail";
  if (v.affinity.status == Status::Indeterminate) return "affinity_indeterminate";
  if (opt.require_lipinski) {
    if (v.lipinski.status == Status::Fail) return "lipinski_fail";
    if (v.lipinski.status == Status::Indeterminate) return "lipinski_indeterminate";
  }
  if (opt.require_properties) {
    bool any_fail = false, any_missing = false;
    for (auto b : v.bands) {
      any_fail = any_fail || b == screen::Band::Fail;
      any_missing = any_missing || b == screen::Band::Missing;
    }
    if (any_fail) return "properties_fail";
    if (any_missing) return "properties_missing";
  }
  if (opt.require_novelty && v.novelty && !v.novelty->novel) return "not_novel";
  return "survivor";
}

/// Reference similarity gate against the configured datasets (skipped when none).
inline void apply_reference_gate(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                 const ResolvedReferences& refs, GenerationResult& res) {
  std::vector<LatentVector> dataset;
  for (const auto& s : dataset_corpus(cfg)) {
    try {
      dataset.push_back(codec.encode(s));
    } catch (const DataError&) {
    }
  }
  for (std::size_t k = 0; k < refs.vectors.size(); ++k) {
    ReferenceInfo info{refs.smiles[k], refs.weights[k], std::nullopt, std::nullopt};
    if (!dataset.empty()) {
      info.avg_similarity = screen::average_similarity(refs.vectors[k], dataset);
      info.gate_pass = screen::passes_reference_gate(*info.avg_similarity, cfg.reference_gate);
      if (!*info.gate_pass) {
        const std::string msg = "reference " + refs.smiles[k] + " has average similarity " +
                                csv::format_fixed(*info.avg_similarity, 4) + " <= gate " +
                                csv::format_double(cfg.reference_gate);
        if (cfg.enforce_reference_gate) throw ConfigError(msg);
        res.warnings.push_back(msg);
      }
    }
    res.references.push_back(info);
  }
  if (dataset.empty()) res.warnings.push_back("reference similarity gate skipped: no dataset configured");
}

inline GenerationResult run_generation(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                       const Predictors& predictors, const screen::PropertyTable* props) {
  GenerationResult res;
  const auto refs = resolve_references(cfg, codec);
  res.start_smiles = refs.start_smiles;
  apply_reference_gate(cfg, codec, refs, res);
  for (auto t : cfg.targets)
    if (!predictors[static_cast<std::size_t>(t)])
      res.warnings.push_back("no predictor for " + std::string(screen::to_string(t)));

  sde::EnsembleOptions eo;
  eo.record_stats = false;
  eo.threads = cfg.threads;
  auto ens = sde::simulate_ensemble(refs.start, cfg.langevin, refs.set, cfg.n_trajectories, eo);
  res.generated = cfg.n_trajectories;
  res.finals = std::move(ens.finals);
  for (const char* r : kDropReasons) res.drops[r] = 0;

  // decode
  res.decoded.resize(res.finals.size());
  std::vector<bool> decoded_ok(res.finals.size(), false);
  std::size_t n_decoded = 0;
  for (std::size_t i = 0; i < res.finals.size(); ++i) {
    try {
      res.decoded[i] = codec.decode(res.finals[i]);
      decoded_ok[i] = true;
      ++n_decoded;
    } catch (const DomainError&) {
      ++res.drops["undecodable"];
    }
  }
  res.stages.push_back({"generated", res.generated});
  res.stages.push_back({"decoded", n_decoded});

  // dedupe on the decoded string, keeping the first trajectory
  std::vector<std::size_t> unique;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < res.finals.size(); ++i) {
    if (!decoded_ok[i]) continue;
    if (seen.insert(res.decoded[i]).second) unique.push_back(i);
    else ++res.drops["duplicate"];
  }
  res.stages.push_back({"unique", unique.size()});

  std::vector<std::size_t> parseable;
  for (auto i : unique) {
    if (smiles::is_parseable(res.decoded[i])) parseable.push_back(i);
    else ++res.drops["unparseable"];
  }
  res.stages.push_back({"parseable", parseable.size()});

  std::vector<std::size_t> encodable;
  std::vector<LatentVector> latents;
  for (auto i : parseable) {
    try {
      latents.push_back(codec.encode(res.decoded[i]));
      encodable.push_back(i);
    } catch (const DataError&) {
      ++res.drops["unencodable"];
    }
  }
  res.stages.push_back({"encodable", encodable.size()});

  std::vector<screen::AffinityVector> dg(encodable.size(), screen::missing_affinities());
  if (!latents.empty()) {
    const auto x = nn::Matrix::from_rows(latents);
    for (auto t : cfg.targets) {
      const auto ti = static_cast<std::size_t>(t);
      if (!predictors[ti]) continue;
      const auto col = predictors[ti]->predict_column(x);
      for (std::size_t j = 0; j < col.size(); ++j) dg[j][ti] = col[j];
    }
  }

  std::size_t n_affinity = 0, n_lipinski = 0, n_props = 0;
  for (std::size_t j = 0; j < encodable.size(); ++j) {
    const auto& smi = res.decoded[encodable[j]];
    const screen::PropertyRecord* rec = nullptr;
    if (props) {
      auto it = props->find(smi);
      if (it != props->end()) rec = &it->second;
    }
    auto v = screen::evaluate_candidate(encodable[j], smi, dg[j], rec, &latents[j], refs.vectors, cfg.screen);
    const auto exit = funnel_exit(v, cfg.screen);
    if (exit.rfind("affinity", 0) != 0) ++n_affinity;
    if (exit.rfind("affinity", 0) != 0 && exit.rfind("lipinski", 0) != 0) ++n_lipinski;
    if (exit == "survivor" || exit == "not_novel") ++n_props;
    if (exit != "survivor") ++res.drops[exit];
    if ((exit == "survivor") != (v.tier == screen::Tier::Lead))
      throw InvariantError("funnel and verdict disagree on '" + smi + "'");
    res.funnel_exit.push_back(exit);
    res.verdicts.push_back(std::move(v));
  }
  res.stages.push_back({"affinity", n_affinity});
  res.stages.push_back({"lipinski", n_lipinski});
  res.stages.push_back({"properties", n_props});
  res.ranked = screen::rank_leads(res.verdicts);
  res.stages.push_back({"novel", res.ranked.size()});

  std::size_t total = res.ranked.size();
  for (const auto& [reason, n] : res.drops) total += n;
  if (total != res.generated) throw InvariantError("funnel attribution does not add up to the generated count");
  for (std::size_t s = 1; s < res.stages.size(); ++s)
    if (res.stages[s].count > res.stages[s - 1].count) throw InvariantError("funnel count increased at " + res.stages[s].name);
  return res;
}

inline ordered_json generation_json(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                    const GenerationResult& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "generation";
  j["seed"] = cfg.seed;
  j["codec"] = {{"kind", codec.kind()}, {"dim", codec.dim()}};
  j["langevin"] = {{"alpha", cfg.langevin.alpha},
                   {"dt", cfg.langevin.dt},
                   {"n_steps", cfg.langevin.n_steps},
                   {"noise_sigma", cfg.langevin.noise_sigma},
                   {"noise_clamp", screen::detail::number_or_null(cfg.langevin.noise_clamp)},
                   {"n_trajectories", cfg.n_trajectories}};
  j["start"] = r.start_smiles;
  ordered_json refs = ordered_json::array();
  for (const auto& ref : r.references) {
    refs.push_back({{"smiles", ref.smiles},
                    {"weight", ref.weight},
                    {"avg_similarity", ref.avg_similarity ? ordered_json(*ref.avg_similarity) : ordered_json(nullptr)},
                    {"gate_pass", ref.gate_pass ? ordered_json(*ref.gate_pass) : ordered_json(nullptr)}});
  }
  j["references"] = refs;
  ordered_json stages = ordered_json::array();
  for (const auto& s : r.stages) stages.push_back({{"stage", s.name}, {"count", s.count}});
  ordered_json drops = ordered_json::object();
  for (const char* reason : kDropReasons) drops[reason] = r.drops.at(reason);
  j["funnel"] = {{"stages", stages}, {"drops", drops}, {"survivors", r.survivors()}};
  ordered_json leads = ordered_json::array();
  for (std::size_t rank = 0; rank < r.ranked.size(); ++rank) {
    auto v = screen::verdict_to_json(r.verdicts[r.ranked[rank]]);
    v["rank"] = rank + 1;
    leads.push_back(std::move(v));
  }
  j["leads"] = leads;
  ordered_json all = ordered_json::array();
  for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
    auto v = screen::verdict_to_json(r.verdicts[i]);
    v["funnel_exit"] = r.funnel_exit[i];
    all.push_back(std::move(v));
  }
  j["candidates"] = all;
  j["property_ranges"] = screen::ranges_to_json();
  j["warnings"] = r.warnings;
  return j;
}

inline std::string generation_text(const GenerationResult& r) {
  std::ostringstream os;
  os << "Generation report\n=================\n";
  os << "start molecule: " << r.start_smiles << "\n";
  for (const auto& ref : r.references) {
    os << "reference " << ref.smiles << " weight " << csv::format_fixed(ref.weight, 4);
    if (ref.avg_similarity) os << " avg similarity " << csv::format_fixed(*ref.avg_similarity, 4);
    os << "\n";
  }
  os << "\nFunnel\n";
  for (const auto& s : r.stages) os << "  " << s.name << ": " << s.count << "\n";
  os << "\nDropped\n";
  for (const char* reason : kDropReasons)
    if (r.drops.at(reason) > 0) os << "  " << reason << ": " << r.drops.at(reason) << "\n";
  os << "\nLeads (" << r.ranked.size() << ")\n";
  for (std::size_t k = 0; k < r.ranked.size(); ++k) {
    const auto& v = r.verdicts[r.ranked[k]];
    os << "  " << k + 1 << ". " << v.smiles << "  excellent " << csv::format_fixed(v.excellent_fraction(), 2)
       << "  mean dG " << csv::format_fixed(v.mean_active_dg(), 3);
    if (v.novelty) os << "  max similarity " << csv::format_fixed(v.novelty->max_similarity, 3);
    os << "\n";
  }
  if (!r.warnings.empty()) {
    os << "\nWarnings\n";
    for (const auto& w : r.warnings) os << "  " << w << "\n";
  }
  return os.str();
}

inline void write_generation_outputs(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                     const GenerationResult& r, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  csv::write_file((out / "generation_report.json").string(), generation_json(cfg, codec, r).dump(2) + "\n");
  csv::write_file((out / "generation_report.txt").string(), generation_text(r));
  csv::write_file((out / "candidates.csv").string(), screen::format_verdict_csv(r.verdicts));
  std::vector<screen::CandidateVerdict> leads;
  for (auto i : r.ranked) leads.push_back(r.verdicts[i]);
  csv::write_file((out / "leads.csv").string(), screen::format_verdict_csv(leads));
  if (cfg.write_latents) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < r.finals.size(); ++i) ids.push_back("g" + std::to_string(i));
    csv::write_file((out / "generated_latents.csv").string(), format_latent_csv(ids, r.finals));
  }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------
struct NamedReconstruction {
  std::string name;
  codec::ReconstructionReport report;
};

struct ValidationResult {
  std::vector<NamedReconstruction> reconstruction;
  std::size_t n_corpus_latents = 0;
  std::size_t n_generated = 0;
  std::vector<double> corpus_profile;
  std::vector<double> generated_profile;
  std::vector<double> reencoded_profile;
  codec::ProfileCheck generated_check;
  std::optional<codec::ProfileCheck> reencoded_check;
  codec::ReencodeCheck reencode;
  std::vector<std::string> second_round_smiles;  // decoded generated molecules, deduplicated
  std::vector<std::string> reencoded_ids;
  std::vector<LatentVector> reencoded;
  std::vector<std::string> warnings;
};

inline std::vector<std::string> validation_corpus(const PipelineConfig& cfg, const codec::LatentCodec& codec) {
  if (!cfg.corpus_path.empty()) return read_smiles_column(cfg.corpus_path);
  if (const auto* t = dynamic_cast<const codec::FileBackedCodec*>(&codec)) return t->smiles();
  return dataset_corpus(cfg);
}

inline ValidationResult run_validation(const PipelineConfig& cfg, const codec::LatentCodec& codec) {
  ValidationResult res;
  const auto corpus = validation_corpus(cfg, codec);
  if (corpus.empty()) throw ConfigError("validation corpus is empty");
  res.reconstruction.push_back({"corpus", codec::reconstruction_rate(codec, corpus)});
  for (std::size_t i = 0; i < screen::kTargetCount; ++i) {
    if (cfg.datasets[i].path.empty()) continue;
    std::vector<std::string> smi;
    for (const auto& r : ingest_dataset(cfg.datasets[i].path, cfg.datasets[i].unit).records) smi.push_back(r.smiles);
    if (smi.empty()) {
      res.warnings.push_back("dataset " + std::string(screen::kTargetNames[i]) + " has no parseable molecules");
      continue;
    }
    res.reconstruction.push_back({std::string(screen::kTargetNames[i]), codec::reconstruction_rate(codec, smi)});
  }
  for (const auto& nr : res.reconstruction)
    if (!nr.report.rate) res.warnings.push_back("reconstruction rate of " + nr.name + " is undefined (nothing encodable)");

  std::vector<LatentVector> corpus_latents;
  for (const auto& s : corpus) {
    try {
      corpus_latents.push_back(codec.encode(s));
    } catch (const DataError&) {
    }
  }
  if (corpus_latents.empty()) throw DataError("validation: no corpus molecule could be encoded");
  res.n_corpus_latents = corpus_latents.size();
  res.corpus_profile = codec::mean_abs_profile(corpus_latents);

  const auto refs = resolve_references(cfg, codec);
  sde::EnsembleOptions eo;
  eo.record_stats = false;
  eo.threads = cfg.threads;
  const auto ens = sde::simulate_ensemble(refs.start, cfg.langevin, refs.set, cfg.n_trajectories, eo);
  res.n_generated = ens.finals.size();
  res.generated_profile = codec::mean_abs_profile(ens.finals);
  res.generated_check = codec::compare_profiles(res.corpus_profile, res.generated_profile, cfg.profile_threshold);
  if (res.generated_check.warn) {
    res.warnings.push_back("generated latent profile departs from the corpus: gap " +
                           csv::format_fixed(res.generated_check.gap, 4) + " at index " +
                           std::to_string(res.generated_check.worst_index) + " exceeds " +
                           csv::format_double(cfg.profile_threshold));
  }

  std::set<std::string> seen;
  for (std::size_t i = 0; i < ens.finals.size(); ++i) {
    std::string s;
    try {
      s = codec.decode(ens.finals[i]);
      res.reencoded.push_back(codec.encode(s));
      res.reencoded_ids.push_back("g" + std::to_string(i));
    } catch (const Error&) {
      continue;
    }
    if (seen.insert(s).second) res.second_round_smiles.push_back(s);
  }
  if (!res.reencoded.empty()) {
    res.reencoded_profile = codec::mean_abs_profile(res.reencoded);
    res.reencoded_check = codec::compare_profiles(res.corpus_profile, res.reencoded_profile, cfg.profile_threshold);
    if (res.reencoded_check->warn) {
      res.warnings.push_back("re-encoded latent profile departs from the corpus: gap " +
                             csv::format_fixed(res.reencoded_check->gap, 4));
    }
  } else {
    res.warnings.push_back("no generated vector could be decoded and re-encoded");
  }
  res.reencode = codec::reencode_check(codec, ens.finals, codec::HullStats::of(corpus_latents), cfg.reencode_slack);
  if (res.reencode.warn) {
    res.warnings.push_back(std::to_string(res.reencode.outside) + " of " + std::to_string(res.reencode.n) +
                           " re-encoded vectors fall outside the corpus radius");
  }
  return res;
}

inline ordered_json validation_json(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                    const ValidationResult& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "validation";
  j["seed"] = cfg.seed;
  j["codec"] = {{"kind", codec.kind()}, {"dim", codec.dim()}};
  ordered_json recon = ordered_json::array();
  for (const auto& nr : r.reconstruction) {
    ordered_json failures = ordered_json::array();
    for (const auto& f : nr.report.failures)
      failures.push_back({{"smiles", f.smiles}, {"decoded", f.decoded}, {"reason", f.reason}});
    recon.push_back({{"dataset", nr.name},
                     {"n_total", nr.report.n_total},
                     {"n_encodable", nr.report.n_encodable},
                     {"n_exact", nr.report.n_exact},
                     {"rate", nr.report.rate ? ordered_json(*nr.report.rate) : ordered_json("undefined")},
                     {"failures", failures}});
  }
  j["reconstruction"] = recon;
  auto check_json = [](const codec::ProfileCheck& c) {
    return ordered_json{{"gap", c.gap}, {"worst_index", c.worst_index}, {"threshold", c.threshold}, {"warn", c.warn}};
  };
  j["profiles"] = {{"corpus", r.corpus_profile},
                   {"generated", r.generated_profile},
                   {"reencoded", r.reencoded_profile}};
  j["profile_checks"] = {{"generated", check_json(r.generated_check)},
                         {"reencoded", r.reencoded_check ? check_json(*r.reencoded_check) : ordered_json(nullptr)}};
  j["reencode"] = {{"n", r.reencode.n}, {"outside_radius", r.reencode.outside}, {"warn", r.reencode.warn}};
  j["counts"] = {{"corpus_latents", r.n_corpus_latents},
                 {"generated", r.n_generated},
                 {"reencoded", r.reencoded.size()},
                 {"second_round_unique", r.second_round_smiles.size()}};
  j["warnings"] = r.warnings;
  return j;
}

inline std::string validation_text(const ValidationResult& r) {
  std::ostringstream os;
  os << "Validation report\n=================\n\nReconstruction\n";
  for (const auto& nr : r.reconstruction) {
    os << "  " << nr.name << ": ";
    if (nr.report.rate) os << csv::format_fixed(*nr.report.rate, 4);
    else os << "undefined";
    os << " (" << nr.report.n_exact << "/" << nr.report.n_encodable << " exact, " << nr.report.n_total << " total)\n";
  }
  os << "\nLatent profiles (L-infinity gap to corpus)\n";
  os << "  generated: " << csv::format_fixed(r.generated_check.gap, 4) << (r.generated_check.warn ? "  WARN" : "") << "\n";
  if (r.reencoded_check)
    os << "  reencoded: " << csv::format_fixed(r.reencoded_check->gap, 4) << (r.reencoded_check->warn ? "  WARN" : "")
       << "\n";
  os << "\nRe-encode radius check: " << r.reencode.outside << " of " << r.reencode.n << " outside\n";
  if (!r.warnings.empty()) {
    os << "\nWarnings\n";
    for (const auto& w : r.warnings) os << "  " << w << "\n";
  }
  return os.str();
}

inline void write_validation_outputs(const PipelineConfig& cfg, const codec::LatentCodec& codec,
                                     const ValidationResult& r, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  csv::write_file((out / "validation_report.json").string(), validation_json(cfg, codec, r).dump(2) + "\n");
  csv::write_file((out / "validation_report.txt").string(), validation_text(r));
  std::string second = "smiles\n";
  for (const auto& s : r.second_round_smiles) second += s + "\n";
  csv::write_file((out / "second_round_input.csv").string(), second);
  if (!r.reencoded.empty())
    csv::write_file((out / "reencoded_latents.csv").string(), format_latent_csv(r.reencoded_ids, r.reencoded));
}

// ---------------------------------------------------------------------------
// Fokker-Planck cross-check
// ---------------------------------------------------------------------------
struct FpCheckResult {
  FpCheckConfig cfg;
  fp::DensityGrid density{0.0, 1.0, std::vector<double>(1, 1.0)};
  fp::EnsembleComparison comparison;
  std::vector<double> histogram;  // in-range sample density per cell
  double dt_pde = 0.0;
  double analytic_mean = 0.0;
  double analytic_variance = 0.0;
};

inline FpCheckResult run_fp_check(const FpCheckConfig& cfg) {
  cfg.validate();
  FpCheckResult r;
  r.cfg = cfg;
  const double hw = cfg.half_width > 0.0 ? cfg.half_width
                                         : fp::ou_half_width(cfg.sigma, cfg.alpha) + std::abs(cfg.x0 - cfg.x_ref);
  const auto grid0 = fp::DensityGrid::point_mass(cfg.x_ref - hw, cfg.x_ref + hw, cfg.cells, cfg.x0);
  fp::FPConfig fc;
  fc.drift = fp::LinearDrift{cfg.alpha, cfg.x_ref, 0.0};
  fc.sigma = cfg.sigma;
  fc.t_end = cfg.t_end;
  const double dx = grid0.dx();
  const double limit = std::min(fp::kDiffusionCfl * dx * dx / (cfg.sigma * cfg.sigma),
                                fp::kAdvectionCfl * dx / (cfg.alpha * (hw + std::abs(cfg.x0 - cfg.x_ref))));
  fc.dt_pde = cfg.dt_pde > 0.0 ? cfg.dt_pde : 0.9 * limit;
  r.dt_pde = fc.dt_pde;
  r.density = fp::solve(grid0, fc);

  sde::LangevinConfig lc;
  lc.alpha = cfg.alpha;
  lc.dt = cfg.dt;
  lc.n_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  lc.noise_sigma = cfg.sigma;
  lc.noise_clamp = sde::kNoClamp;
  lc.rng_seed = cfg.seed;
  sde::EnsembleOptions eo;
  eo.record_stats = false;
  eo.threads = cfg.threads;
  const auto ens = sde::simulate_ensemble(LatentVector{cfg.x0}, lc, sde::ReferenceSet::single(LatentVector{cfg.x_ref}),
                                          cfg.n_trajectories, eo);
  std::vector<double> samples;
  samples.reserve(ens.finals.size());
  for (const auto& v : ens.finals) samples.push_back(v[0]);
  r.comparison = fp::compare_ensemble(samples, r.density);

  r.histogram.assign(r.density.n_cells(), 0.0);
  std::size_t in_range = 0;
  for (double x : samples) {
    const auto i = r.density.cell_of(x);
    if (i >= 0) {
      r.histogram[static_cast<std::size_t>(i)] += 1.0;
      ++in_range;
    }
  }
  if (in_range > 0)
    for (double& h : r.histogram) h /= static_cast<double>(in_range) * r.density.dx();

  const double decay = std::exp(-cfg.alpha * cfg.t_end);
  r.analytic_mean = cfg.x_ref + (cfg.x0 - cfg.x_ref) * decay;
  r.analytic_variance = sde::stationary_variance(cfg.sigma, cfg.alpha) * -std::expm1(-2.0 * cfg.alpha * cfg.t_end);
  return r;
}

inline ordered_json fp_check_json(const FpCheckResult& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "fp-check";
  j["setup"] = {{"alpha", r.cfg.alpha},         {"sigma", r.cfg.sigma}, {"x_ref", r.cfg.x_ref},
                {"x0", r.cfg.x0},               {"t_end", r.cfg.t_end}, {"dt", r.cfg.dt},
                {"dt_pde", r.dt_pde},           {"cells", r.cfg.cells}, {"n_trajectories", r.cfg.n_trajectories},
                {"x_min", r.density.x_min()},   {"x_max", r.density.x_max()}, {"seed", r.cfg.seed}};
  j["analytic"] = {{"mean", r.analytic_mean}, {"variance", r.analytic_variance}};
  j["fokker_planck"] = {{"mass", r.density.mass()}, {"mean", r.density.mean()}, {"variance", r.density.variance()}};
  const auto& c = r.comparison;
  j["ensemble"] = {{"mean", c.sample_mean},
                   {"variance", c.sample_variance},
                   {"out_of_range", c.n_out_of_range},
                   {"l1_to_fokker_planck", screen::detail::number_or_null(c.l1)}};
  return j;
}

inline std::string fp_density_csv(const FpCheckResult& r) {
  std::ostringstream os;
  os << "x,fokker_planck,ensemble\n";
  for (std::size_t i = 0; i < r.density.n_cells(); ++i)
    os << csv::format_double(r.density.center(i)) << ',' << csv::format_double(r.density.p()[i]) << ','
       << csv::format_double(r.histogram[i]) << '\n';
  return os.str();
}

inline void write_fp_outputs(const FpCheckResult& r, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  csv::write_file((out / "fp_report.json").string(), fp_check_json(r).dump(2) + "\n");
  csv::write_file((out / "fp_density.csv").string(), fp_density_csv(r));
}

}  // namespace latentgen::pipeline
