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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "funnel_fixture.hpp"
#include "latentgen/pipeline.hpp"

using namespace latentgen;
using namespace latentgen::pipeline;
using testing_support::FunnelWorld;
using testing_support::TempDir;

namespace {

IngestReport ingest_text(const std::string& text, LabelUnit unit) {
  std::istringstream in(text);
  return ingest_table(csv::parse(in, "mem"), "mem", unit);
}

struct Loaded {
  PipelineConfig cfg;
  std::unique_ptr<codec::LatentCodec> codec;
  Predictors predictors;
  std::optional<screen::PropertyTable> props;
};

Loaded load_world(const std::string& config, const std::vector<std::string>& overrides = {}) {
  Loaded l;
  l.cfg = load_config(config, overrides);
  l.codec = load_codec(l.cfg);
  std::vector<std::string> warnings;
  l.predictors = load_predictors(l.cfg, *l.codec, warnings);
  l.props = load_properties(l.cfg);
  return l;
}

GenerationResult generate(const Loaded& l) {
  return run_generation(l.cfg, *l.codec, l.predictors, l.props ? &*l.props : nullptr);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LATENTGEN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Ingest, UnitConversions) {
  const auto dg = ingest_text("smiles,label\nC,-10.0\n", LabelUnit::DeltaG);
  ASSERT_EQ(dg.records.size(), 1u);
  EXPECT_EQ(dg.records[0].delta_g, -10.0);
  const auto ki = ingest_text("smiles,label\nCCO,0.1\n", LabelUnit::KiMicromolar);
  EXPECT_NEAR(ki.records[0].delta_g, -9.5431, 5e-5);
  EXPECT_EQ(ki.records[0].source_measure, SourceMeasure::Ki);
  EXPECT_NEAR(ingest_text("smiles,label\nCCO,1e-7\n", LabelUnit::KiMolar).records[0].delta_g, -9.5431, 5e-5);
  EXPECT_NEAR(ingest_text("smiles,label\nCCO,0.2\n", LabelUnit::IC50Micromolar).records[0].delta_g, -9.5431, 5e-5);
  EXPECT_EQ(label_unit_from_string("ic50_m"), LabelUnit::IC50Molar);
  EXPECT_THROW(label_unit_from_string("nm"), ConfigError);
}

TEST(Ingest, BadSmilesDroppedWithReport) {
  std::string text = "smiles,label\n";
  for (int i = 0; i < 9; ++i) text += "C" + std::string(static_cast<std::size_t>(i), 'C') + "O,-9\n";
  text += "C(C,-9\n";
  const auto rep = ingest_text(text, LabelUnit::DeltaG);
  EXPECT_EQ(rep.n_rows, 10u);
  EXPECT_EQ(rep.records.size(), 9u);
  EXPECT_EQ(rep.n_dropped(), 1u);
  EXPECT_NE(rep.dropped[0].find("C(C"), std::string::npos);
}

TEST(Ingest, HardErrors) {
  EXPECT_THROW(ingest_text("smiles,dg\nC,1\n", LabelUnit::DeltaG), DataError);
  EXPECT_THROW(ingest_text("smiles,label\nC,abc\n", LabelUnit::DeltaG), DataError);
  EXPECT_THROW(ingest_text("smiles,label\nC,-1\n", LabelUnit::KiMolar), DataError);
  EXPECT_THROW(ingest_text("smiles,label\nC,1,2\n", LabelUnit::DeltaG), DataError);
  const auto pos = ingest_text("smiles,label\nC,1.5\n", LabelUnit::DeltaG);
  EXPECT_EQ(pos.records.size(), 1u);
  EXPECT_EQ(pos.warnings.size(), 1u);
}

TEST(PipelineConfigTest, ValidationErrors) {
  TempDir dir("pipeline_cfg");
  const auto world = testing_support::make_funnel_world();
  const auto path = testing_support::write_funnel_world(world, dir);
  EXPECT_NO_THROW(load_config(path));
  EXPECT_THROW(load_config(path, {"langevin.alpha=-1"}), ConfigError);
  EXPECT_THROW(load_config(path, {"unknown.key=1"}), ConfigError);
  EXPECT_THROW(load_config(path, {"properties.path=nowhere.csv"}), ConfigError);
  EXPECT_THROW(load_config(path, {"references.smiles=CCO"}), ConfigError);
  EXPECT_THROW(load_config(path, {"references.weights=1,2"}), ConfigError);
  EXPECT_THROW(load_config(path, {"targets=dat,dat"}), ConfigError);
  EXPECT_THROW(load_config(path, {"codec.kind=toy"}), ConfigError);
  EXPECT_THROW(load_config(path, {"data.dat.unit=pm"}), ConfigError);
  const auto cfg = load_config(path, {"targets=dat,herg"});
  EXPECT_EQ(cfg.targets.size(), 2u);
  EXPECT_EQ(cfg.langevin.rng_seed, derive_seed(11, "pipeline.generate"));
  EXPECT_NE(cfg.train_seed(screen::Target::DAT), cfg.train_seed(screen::Target::NET));
}

TEST(Generation, ZeroNoiseCollapsesToOneMolecule) {
  TempDir dir("pipeline_zero");
  const auto world = testing_support::make_funnel_world();
  const auto l = load_world(testing_support::write_funnel_world(world, dir, 300), {"langevin.noise_sigma=0"});
  const auto res = generate(l);
  EXPECT_EQ(res.generated, 300u);
  ASSERT_GE(res.stages.size(), 3u);
  EXPECT_EQ(res.stages[2].name, "unique");
  EXPECT_EQ(res.stages[2].count, 1u);
  EXPECT_EQ(res.drops.at("duplicate"), 299u);
}

TEST(Generation, SurvivorsMatchExhaustiveOracle) {
  TempDir dir("pipeline_funnel");
  const auto world = testing_support::make_funnel_world();
  const auto l = load_world(testing_support::write_funnel_world(world, dir));
  const auto res = generate(l);
  std::set<std::string> decoded;
  for (const auto& s : res.decoded)
    if (!s.empty()) decoded.insert(s);
  EXPECT_GE(decoded.size(), 40u);
  const auto expected = testing_support::funnel_oracle(world, decoded);
  const auto got = res.survivor_smiles();
  EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), expected);
  EXPECT_GE(expected.size(), 2u);
  EXPECT_LT(expected.size(), decoded.size());
  std::cout << "decoded " << decoded.size() << " unique, " << expected.size() << " survivors\n";
}

TEST(Generation, FunnelAccountingAndMonotonicity) {
  TempDir dir("pipeline_accounting");
  const auto world = testing_support::make_funnel_world(7);
  const auto l = load_world(testing_support::write_funnel_world(world, dir, 1000));
  const auto res = generate(l);
  std::size_t total = res.survivors();
  for (const auto& [reason, n] : res.drops) total += n;
  EXPECT_EQ(total, res.generated);
  for (std::size_t s = 1; s < res.stages.size(); ++s) EXPECT_LE(res.stages[s].count, res.stages[s - 1].count);
  EXPECT_EQ(res.verdicts.size(), res.funnel_exit.size());
  for (std::size_t i = 0; i < res.verdicts.size(); ++i)
    EXPECT_EQ(res.funnel_exit[i] == "survivor", res.verdicts[i].tier == screen::Tier::Lead);
  std::vector<std::string> names;
  for (const auto& st : res.stages) names.push_back(st.name);
  EXPECT_EQ(names, (std::vector<std::string>{"generated", "decoded", "unique", "parseable", "encodable", "affinity",
                                             "lipinski", "properties", "novel"}));
}

TEST(Generation, DeterministicAcrossRunsAndThreads) {
  TempDir dir("pipeline_det");
  const auto world = testing_support::make_funnel_world();
  const auto path = testing_support::write_funnel_world(world, dir, 700);
  const auto a = load_world(path, {"generation.threads=1"});
  const auto b = load_world(path, {"generation.threads=3"});
  const auto ja = generation_json(a.cfg, *a.codec, generate(a)).dump(2);
  EXPECT_EQ(ja, generation_json(a.cfg, *a.codec, generate(a)).dump(2));
  EXPECT_EQ(ja, generation_json(b.cfg, *b.codec, generate(b)).dump(2));
  const auto c = load_world(path, {"seed=12"});
  EXPECT_NE(ja, generation_json(c.cfg, *c.codec, generate(c)).dump(2));
}

TEST(Generation, ReferenceGate) {
  TempDir dir("pipeline_gate");
  const auto world = testing_support::make_funnel_world();
  const auto path = testing_support::write_funnel_world(world, dir, 100);
  // A dataset of molecules far from the references in latent space trips the gate.
  std::vector<std::pair<double, std::size_t>> sims;
  for (std::size_t i = 0; i < FunnelWorld::kSize; ++i)
    sims.push_back({cosine_similarity(world.latents[i], world.latents[3]), i});
  std::sort(sims.begin(), sims.end());
  std::string data = "smiles,label\n";
  for (std::size_t k = 0; k < 5; ++k) data += world.smiles[sims[k].second] + ",-9\n";
  dir.write("far.csv", data);
  EXPECT_THROW(generate(load_world(path, {"data.dat.path=" + dir.file("far.csv")})), ConfigError);
  const auto lax = load_world(path, {"data.dat.path=" + dir.file("far.csv"), "screen.enforce_reference_gate=false"});
  const auto res = generate(lax);
  ASSERT_EQ(res.references.size(), 3u);
  ASSERT_TRUE(res.references[0].gate_pass.has_value());
  EXPECT_FALSE(*res.references[0].gate_pass);
  const auto none = generate(load_world(path));
  EXPECT_FALSE(none.references[0].avg_similarity.has_value());
}

TEST(Validation, FileBackedReconstructsItsTable) {
  TempDir dir("pipeline_validate");
  const auto world = testing_support::make_funnel_world();
  const auto l = load_world(testing_support::write_funnel_world(world, dir, 200));
  const auto res = run_validation(l.cfg, *l.codec);
  ASSERT_FALSE(res.reconstruction.empty());
  ASSERT_TRUE(res.reconstruction[0].report.rate.has_value());
  EXPECT_EQ(*res.reconstruction[0].report.rate, 1.0);
  EXPECT_EQ(res.n_corpus_latents, FunnelWorld::kSize);
  EXPECT_FALSE(res.second_round_smiles.empty());
  const auto j = validation_json(l.cfg, *l.codec, res);
  EXPECT_EQ(j["profiles"]["corpus"].size(), FunnelWorld::kDim);
}

TEST(Validation, ProfileWarningTracksNoiseTuning) {
  // Corpus drawn from the stationary law of the clamped process around a zero centroid.
  TempDir dir("pipeline_profile");
  constexpr std::size_t n = 1000, d = 8;
  const auto smiles = testing_support::toy_corpus(n, 99);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  // Per-step variance of 0.1 * clamp(z, -1, 1) is 0.01 * (1 - 2 phi(1)) ~ 0.01 * 0.5161.
  const double clamped_var = 0.01 * (1.0 - 2.0 * std::exp(-0.5) / std::sqrt(2.0 * M_PI));
  const double a = 1.0 - 0.01;
  const double sd = std::sqrt(clamped_var * (1.0 - std::pow(a, 2.0 * 500)) / (1.0 - a * a));
  std::vector<std::string> ids;
  std::vector<LatentVector> vs;
  std::string side = "id,smiles\n";
  for (std::size_t i = 0; i < n; ++i) {
    LatentVector v(d);
    for (auto& x : v) x = sd * n01(rng);
    if (i == 1)
      for (std::size_t k = 0; k < d; ++k) v[k] = -vs[0][k];
    vs.push_back(v);
    ids.push_back("c" + std::to_string(i));
    side += ids.back() + "," + smiles[i] + "\n";
  }
  dir.write("latents.csv", format_latent_csv(ids, vs));
  dir.write("smiles.csv", side);
  const auto path = dir.write("validate.conf",
                              "codec.latents = latents.csv\ncodec.smiles = smiles.csv\nreferences.ids = c0, c1\n"
                              "generation.start_id = c0\ngeneration.n_trajectories = 2000\nlangevin.alpha = 1\n"
                              "langevin.dt = 0.01\nlangevin.n_steps = 500\nlangevin.noise_sigma = 1\n");
  const auto untuned = load_world(path, {"langevin.noise_clamp=inf"});
  const auto ru = run_validation(untuned.cfg, *untuned.codec);
  EXPECT_TRUE(ru.generated_check.warn) << ru.generated_check.gap;
  const auto tuned = load_world(path, {"langevin.noise_clamp=0.1"});
  const auto rt = run_validation(tuned.cfg, *tuned.codec);
  EXPECT_FALSE(rt.generated_check.warn) << rt.generated_check.gap;
  std::cout << "profile gap untuned " << ru.generated_check.gap << ", tuned " << rt.generated_check.gap << "\n";
}

TEST(ExitCodes, MappingAndCli) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitUsage);
  EXPECT_EQ(exit_code_for(DataError("x")), kExitData);
  EXPECT_EQ(exit_code_for(InvariantError("x")), kExitInternal);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitInternal);

  TempDir dir("pipeline_cli");
  const auto world = testing_support::make_funnel_world();
  const auto path = testing_support::write_funnel_world(world, dir, 200);
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("generate --bogus"), 1);
  EXPECT_EQ(run_cli("generate --config " + dir.file("missing.conf")), 1);
  EXPECT_EQ(run_cli("convert --unit ki_um --value 0.1"), 0);
  EXPECT_EQ(run_cli("convert --unit ki_um --value -1"), 2);
  EXPECT_EQ(run_cli("generate --config " + path + " --out " + dir.file("out")), 0);
  EXPECT_TRUE(std::filesystem::exists(dir.file("out/generation_report.json")));
  EXPECT_TRUE(std::filesystem::exists(dir.file("out/leads.csv")));
  dir.write("properties.csv", "smiles,caco2\nC,1\n");
  EXPECT_EQ(run_cli("generate --config " + path + " --out " + dir.file("out2")), 2);
  EXPECT_EQ(run_cli("descriptors --smiles CCO"), 0);
  EXPECT_EQ(run_cli("descriptors --smiles 'C(C'"), 2);
}
