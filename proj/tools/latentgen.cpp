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

// latentgen command-line interface.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latentgen/pipeline.hpp"

namespace fs = std::filesystem;
using namespace latentgen;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "Configuration file (key = value)");
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "Root seed, overrides the config value");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--set", c.overrides, "Override a config key, key=value (repeatable)");
}

pipeline::PipelineConfig load(const Common& c) {
  auto overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  return pipeline::load_config(c.config, overrides);
}

void log(const std::string& msg) { std::cerr << "latentgen: " << msg << "\n"; }

void write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  csv::write_file(path.string(), content);
}

// ---------------------------------------------------------------------------

int cmd_train(const Common& c, const std::string& target, bool cv, bool train_codec) {
  const auto cfg = load(c);
  const fs::path out(c.out);
  if (train_codec) {
    auto corpus = cfg.corpus_path.empty() ? pipeline::dataset_corpus(cfg) : pipeline::read_smiles_column(cfg.corpus_path);
    if (corpus.empty()) throw ConfigError("no corpus to train the toy codec on (configure data.* or validate.corpus)");
    auto toy_cfg = cfg.toy;
    toy_cfg.train.rng_seed = cfg.codec_seed();
    std::vector<double> losses;
    log("training toy codec on " + std::to_string(corpus.size()) + " molecules");
    const auto ae = codec::ToyAutoencoder::train(corpus, toy_cfg, &losses);
    fs::create_directories(out);
    ae.save((out / "toy_codec.json").string());
    write(out / "toy_codec_loss.csv", nn::format_loss_csv(losses));
    const auto rec = codec::reconstruction_rate(ae, corpus);
    nlohmann::ordered_json j;
    j["schema_version"] = pipeline::kSchemaVersion;
    j["kind"] = "train-codec";
    j["seed"] = cfg.seed;
    j["n_corpus"] = corpus.size();
    j["final_loss"] = losses.empty() ? 0.0 : losses.back();
    j["reconstruction_rate"] = rec.rate ? nlohmann::ordered_json(*rec.rate) : nlohmann::ordered_json("undefined");
    write(out / "toy_codec_report.json", j.dump(2) + "\n");
    log("toy codec reconstruction rate " + (rec.rate ? csv::format_fixed(*rec.rate, 4) : std::string("undefined")));
    return pipeline::kExitOk;
  }

  std::vector<screen::Target> targets;
  if (target == "all") {
    for (auto t : cfg.targets)
      if (cfg.has_dataset(t)) targets.push_back(t);
    if (targets.empty()) throw ConfigError("no datasets configured");
  } else {
    targets.push_back(screen::target_from_string(target));
  }
  const auto codec = pipeline::load_codec(cfg);
  for (auto t : targets) {
    const std::string name(screen::to_string(t));
    log("training predictor for " + name);
    const auto rep = pipeline::run_training(cfg, *codec, t, cv);
    fs::create_directories(out);
    nn::save_model(rep.result.model, (out / ("model_" + name + ".json")).string());
    write(out / ("loss_" + name + ".csv"), nn::format_loss_csv(rep.result.loss_history));
    write(out / ("train_" + name + ".json"), pipeline::to_json(rep).dump(2) + "\n");
    for (const auto& w : rep.warnings) log("warning: " + w);
    if (rep.cv) {
      log(name + " " + std::to_string(rep.cv->k) + "-fold CV: mean R " + csv::format_fixed(rep.cv->mean_r, 4) +
          ", mean RMSE " + csv::format_fixed(rep.cv->mean_rmse, 4));
    }
  }
  return pipeline::kExitOk;
}

int cmd_generate(const Common& c) {
  const auto cfg = load(c);
  const auto codec = pipeline::load_codec(cfg);
  const auto props = pipeline::load_properties(cfg);
  std::vector<std::string> warnings;
  const auto predictors = pipeline::load_predictors(cfg, *codec, warnings);
  auto res = pipeline::run_generation(cfg, *codec, predictors, props ? &*props : nullptr);
  res.warnings.insert(res.warnings.begin(), warnings.begin(), warnings.end());
  pipeline::write_generation_outputs(cfg, *codec, res, c.out);
  for (const auto& s : res.stages) log(s.name + ": " + std::to_string(s.count));
  for (const auto& w : res.warnings) log("warning: " + w);
  return pipeline::kExitOk;
}

int cmd_screen(const Common& c, const std::string& candidates_path, const std::string& properties_path) {
  screen::ScreenOptions opt;
  std::unique_ptr<codec::LatentCodec> codec;
  std::vector<LatentVector> ref_vectors;
  std::optional<screen::PropertyTable> props;
  if (!c.config.empty()) {
    const auto cfg = load(c);
    opt = cfg.screen;
    codec = pipeline::load_codec(cfg);
    ref_vectors = pipeline::resolve_references(cfg, *codec).vectors;
    props = pipeline::load_properties(cfg);
  }
  if (!properties_path.empty()) props = screen::read_property_csv(properties_path);
  if (!props) log("warning: no property table; every property band is missing");
  if (!codec) log("warning: no codec configured; novelty is not evaluated");

  const auto candidates = screen::read_candidates_csv(candidates_path);
  std::vector<screen::CandidateVerdict> verdicts;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    const screen::PropertyRecord* rec = nullptr;
    if (props) {
      auto it = props->find(cand.smiles);
      if (it != props->end()) rec = &it->second;
    }
    std::optional<LatentVector> latent;
    if (codec) {
      try {
        latent = codec->encode(cand.smiles);
      } catch (const DataError& e) {
        log("warning: cannot encode " + cand.smiles + ": " + e.what());
      }
    }
    verdicts.push_back(screen::evaluate_candidate(i, cand.smiles, cand.dg, rec, latent ? &*latent : nullptr,
                                                  ref_vectors, opt));
  }
  const auto ranked = screen::rank_leads(verdicts);
  nlohmann::ordered_json j;
  j["schema_version"] = pipeline::kSchemaVersion;
  j["kind"] = "screen";
  j["n_candidates"] = verdicts.size();
  const auto aff = screen::affinity_filter([&] {
    std::vector<screen::AffinityVector> v;
    for (const auto& cand : candidates) v.push_back(cand.dg);
    return v;
  }(), opt.thresholds);
  j["affinity"] = {{"pass", aff.passing.size()}, {"fail", aff.failing.size()}, {"indeterminate", aff.indeterminate.size()}};
  nlohmann::ordered_json leads = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    auto v = screen::verdict_to_json(verdicts[ranked[k]]);
    v["rank"] = k + 1;
    leads.push_back(std::move(v));
  }
  j["leads"] = leads;
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) all.push_back(screen::verdict_to_json(v));
  j["candidates"] = all;
  j["property_ranges"] = screen::ranges_to_json();
  const fs::path out(c.out);
  write(out / "screen_report.json", j.dump(2) + "\n");
  write(out / "verdicts.csv", screen::format_verdict_csv(verdicts));
  log(std::to_string(ranked.size()) + " lead(s) out of " + std::to_string(verdicts.size()) + " candidates");
  return pipeline::kExitOk;
}

int cmd_validate(const Common& c) {
  const auto cfg = load(c);
  const auto codec = pipeline::load_codec(cfg);
  const auto res = pipeline::run_validation(cfg, *codec);
  pipeline::write_validation_outputs(cfg, *codec, res, c.out);
  for (const auto& nr : res.reconstruction)
    log("reconstruction " + nr.name + ": " + (nr.report.rate ? csv::format_fixed(*nr.report.rate, 4) : "undefined"));
  for (const auto& w : res.warnings) log("warning: " + w);
  return pipeline::kExitOk;
}

int cmd_fp_check(const Common& c, std::optional<std::size_t> trajectories, std::optional<std::size_t> cells) {
  pipeline::FpCheckConfig fc;
  if (!c.config.empty()) {
    fc = load(c).fp;
  } else {
    if (!c.overrides.empty()) throw ConfigError("--set needs --config");
    fc.seed = derive_seed(c.seed.value_or(0), "pipeline.fp");
  }
  if (trajectories) fc.n_trajectories = *trajectories;
  if (cells) fc.cells = *cells;
  const auto r = pipeline::run_fp_check(fc);
  pipeline::write_fp_outputs(r, c.out);
  log("ensemble mean " + csv::format_fixed(r.comparison.sample_mean, 5) + ", variance " +
      csv::format_fixed(r.comparison.sample_variance, 5) + " (analytic " + csv::format_fixed(r.analytic_variance, 5) +
      "), L1 to Fokker-Planck " + csv::format_fixed(r.comparison.l1, 5));
  return pipeline::kExitOk;
}

int cmd_descriptors(const std::string& input, const std::string& single, const std::string& output) {
  std::ostringstream os;
  os << smiles::kDescriptorHeader << "\n";
  std::size_t dropped = 0;
  auto one = [&](const std::string& s) {
    try {
      os << smiles::descriptor_row(s, smiles::descriptors(s)) << "\n";
    } catch (const ParseError& e) {
      ++dropped;
      log("skipping '" + s + "': " + e.what());
    }
  };
  if (!single.empty()) os << smiles::descriptor_row(single, smiles::descriptors(single)) << "\n";
  if (!input.empty())
    for (const auto& s : pipeline::read_smiles_column(input)) one(s);
  if (single.empty() && input.empty()) throw ConfigError("descriptors needs --smiles or --input");
  if (output.empty()) std::cout << os.str();
  else write(output, os.str());
  if (dropped > 0) log(std::to_string(dropped) + " unparseable SMILES skipped");
  return pipeline::kExitOk;
}

int cmd_convert(const std::string& unit_name, std::optional<double> value, const std::string& input,
                const std::string& output) {
  const auto unit = pipeline::label_unit_from_string(unit_name);
  if (value) {
    std::cout << csv::format_double(pipeline::label_to_delta_g(*value, unit)) << "\n";
    return pipeline::kExitOk;
  }
  if (input.empty()) throw ConfigError("convert needs --value or --input");
  const auto rep = pipeline::ingest_dataset(input, unit);
  std::ostringstream os;
  os << "smiles,label\n";
  for (const auto& r : rep.records) os << r.smiles << ',' << csv::format_double(r.delta_g) << "\n";
  if (output.empty()) std::cout << os.str();
  else write(output, os.str());
  for (const auto& w : rep.warnings) log("warning: " + w);
  log(std::to_string(rep.records.size()) + " records, " + std::to_string(rep.n_dropped()) + " dropped");
  for (const auto& d : rep.dropped) log("dropped " + d);
  return pipeline::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentgen: Langevin latent-space generation and multi-target screening"};
  app.require_subcommand(1);

  Common train_c, gen_c, screen_c, val_c, fp_c;

  auto* train = app.add_subcommand("train", "Train per-target affinity predictors (or the toy codec)");
  add_common(train, train_c, true);
  std::string target = "all";
  bool cv = false, train_codec = false;
  train->add_option("--target", target, "dat, net, sert, herg or all")->capture_default_str();
  train->add_flag("--cv", cv, "Also run k-fold cross validation");
  train->add_flag("--codec", train_codec, "Train the toy autoencoder codec instead");

  auto* gen = app.add_subcommand("generate", "Run the generation and screening funnel");
  add_common(gen, gen_c, true);

  auto* scr = app.add_subcommand("screen", "Screen a candidate CSV (smiles,dg_dat,dg_net,dg_sert,dg_herg)");
  add_common(scr, screen_c, false);
  std::string candidates, properties;
  scr->add_option("--candidates", candidates, "Candidate CSV")->required();
  scr->add_option("--properties", properties, "External property CSV");

  auto* val = app.add_subcommand("validate", "Reconstruction rates and latent-distribution checks");
  add_common(val, val_c, true);

  auto* fpc = app.add_subcommand("fp-check", "Compare a Langevin ensemble with the Fokker-Planck density");
  add_common(fpc, fp_c, false);
  std::optional<std::size_t> trajectories, cells;
  fpc->add_option("--trajectories", trajectories, "Ensemble size");
  fpc->add_option("--cells", cells, "Grid cells");

  auto* desc = app.add_subcommand("descriptors", "Compute SMILES descriptors");
  std::string desc_input, desc_smiles, desc_out;
  desc->add_option("--input", desc_input, "CSV with a smiles column");
  desc->add_option("--smiles", desc_smiles, "A single SMILES string");
  desc->add_option("--out", desc_out, "Output CSV (stdout when omitted)");

  auto* conv = app.add_subcommand("convert", "Convert Ki/IC50 labels to dG (kcal/mol)");
  std::string unit = "ki_um", conv_input, conv_out;
  std::optional<double> value;
  conv->add_option("--unit", unit, "ki_m, ki_um, ic50_m, ic50_um or deltag")->capture_default_str();
  conv->add_option("--value", value, "A single value to convert");
  conv->add_option("--input", conv_input, "Dataset CSV (smiles,label)");
  conv->add_option("--out", conv_out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? pipeline::kExitOk : pipeline::kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_c, target, cv, train_codec);
    if (*gen) return cmd_generate(gen_c);
    if (*scr) return cmd_screen(screen_c, candidates, properties);
    if (*val) return cmd_validate(val_c);
    if (*fpc) return cmd_fp_check(fp_c, trajectories, cells);
    if (*desc) return cmd_descriptors(desc_input, desc_smiles, desc_out);
    if (*conv) return cmd_convert(unit, value, conv_input, conv_out);
  } catch (const std::exception& e) {
    std::cerr << "latentgen: error: " << e.what() << "\n";
    return pipeline::exit_code_for(e);
  }
  return pipeline::kExitUsage;
}
