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

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "latentgen/codec.hpp"
#include "latentgen/latent_io.hpp"

using namespace latentgen;
using namespace latentgen::codec;

namespace {

FileBackedCodec random_table(std::size_t n, std::size_t d, std::uint64_t seed, DecodePolicy policy = DecodePolicy::Cosine) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const auto smiles = testing_support::toy_corpus(n, seed);
  std::vector<std::string> ids;
  std::vector<LatentVector> vs;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("m" + std::to_string(i));
    LatentVector v(d);
    for (auto& x : v) x = n01(rng);
    vs.push_back(v);
  }
  return FileBackedCodec(ids, smiles, vs, "test", policy);
}

}  // namespace

TEST(FileBacked, EveryRowRoundTrips) {
  for (auto policy : {DecodePolicy::Cosine, DecodePolicy::Euclidean}) {
    const auto codec = random_table(100, 16, 3, policy);
    for (const auto& s : codec.smiles()) EXPECT_EQ(codec.decode(codec.encode(s)), s);
    for (std::size_t i = 0; i < codec.size(); ++i) EXPECT_EQ(codec.decode(codec.vectors()[i]), codec.smiles()[i]);
    const auto rep = reconstruction_rate(codec, codec.smiles());
    ASSERT_TRUE(rep.rate.has_value());
    EXPECT_EQ(*rep.rate, 1.0);
    EXPECT_TRUE(rep.failures.empty());
  }
}

TEST(FileBacked, PerturbationBelowMarginKeepsDecode) {
  const auto codec = random_table(60, 8, 5);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (std::size_t i = 0; i < codec.size(); ++i) {
    const auto& v = codec.vectors()[i];
    // Smallest angle from v to any other row.
    double min_angle = M_PI;
    for (std::size_t j = 0; j < codec.size(); ++j)
      if (j != i) min_angle = std::min(min_angle, std::acos(std::clamp(cosine_similarity(v, codec.vectors()[j]), -1.0, 1.0)));
    // A perturbation of relative norm r turns v by at most asin(r); keep that under half the margin.
    const double r = 0.9 * std::sin(min_angle / 2.0);
    LatentVector delta(v.dim());
    for (auto& x : delta) x = n01(rng);
    const double scale = r * norm(v.span()) / norm(delta.span());
    LatentVector w = v;
    for (std::size_t k = 0; k < v.dim(); ++k) w[k] += scale * delta[k];
    EXPECT_EQ(codec.decode(w), codec.smiles()[i]) << i;
  }
}

TEST(FileBacked, Errors) {
  const auto codec = random_table(10, 4, 1);
  EXPECT_THROW(codec.encode("CCCCCCCCCCCCCCCCCCCCCCCCCCCCCCCC"), LookupError);
  EXPECT_THROW(codec.decode(LatentVector(4, 0.0)), DomainError);
  EXPECT_THROW(codec.decode(LatentVector(5, 1.0)), ShapeError);
  EXPECT_NO_THROW(random_table(10, 4, 1, DecodePolicy::Euclidean).decode(LatentVector(4, 0.0)));
  EXPECT_THROW(FileBackedCodec({}, {}, {}), DataError);
  EXPECT_THROW(FileBackedCodec({"a"}, {"C"}, {LatentVector(3, 0.0)}), DataError);
  EXPECT_THROW(FileBackedCodec({"a", "b"}, {"C", "CC"}, {LatentVector(3, 1.0), LatentVector(2, 1.0)}), ShapeError);
}

TEST(FileBacked, DisjointCorpusHasUndefinedRate) {
  const auto codec = random_table(10, 4, 1);
  const auto rep = reconstruction_rate(codec, {"ClCCl", "BrCBr"});
  EXPECT_FALSE(rep.rate.has_value());
  EXPECT_EQ(rep.n_encodable, 0u);
  EXPECT_EQ(rep.failures.size(), 2u);
  EXPECT_THROW(reconstruction_rate(codec, {}), DomainError);
}

TEST(FileBacked, LoadsFromFiles) {
  testing_support::TempDir dir("codec_files");
  const auto codec = random_table(12, 5, 7);
  csv::write_file(dir.file("lat.csv"), format_latent_csv(codec.ids(), codec.vectors()));
  std::string sidecar = "id,smiles\n";
  for (std::size_t i = codec.size(); i-- > 0;) sidecar += codec.ids()[i] + "," + codec.smiles()[i] + "\n";
  dir.write("smi.csv", sidecar);
  const auto loaded = FileBackedCodec::from_files(dir.file("lat.csv"), dir.file("smi.csv"));
  EXPECT_EQ(loaded.ids(), codec.ids());
  EXPECT_EQ(loaded.smiles(), codec.smiles());
  EXPECT_EQ(loaded.vectors(), codec.vectors());
  EXPECT_EQ(loaded.kind(), "file");
  EXPECT_EQ(loaded.find_id("m3"), std::optional<std::size_t>(3));
  dir.write("short.csv", "id,smiles\nm0,C\n");
  EXPECT_THROW(FileBackedCodec::from_files(dir.file("lat.csv"), dir.file("short.csv")), DataError);
}

TEST(TokenizerTest, EncodingAndLimits) {
  const Tokenizer tok(6);
  EXPECT_EQ(tok.width(), 6 * tok.vocab_size());
  EXPECT_THROW(tok.tokens("CCCCCCC"), CapacityError);
  EXPECT_THROW(tok.tokens("C$"), DataError);
  std::vector<double> row(tok.width());
  tok.one_hot("CCl", row.data());
  EXPECT_EQ(tok.from_scores(row.data()), "CCl");
  EXPECT_THROW(Tokenizer(0), ConfigError);
}

TEST(Toy, DeterministicEncodeDecodeAndPersistence) {
  ToyConfig cfg;
  cfg.max_len = 12;
  cfg.latent_dim = 8;
  cfg.hidden = 16;
  cfg.train.epochs = 3;
  cfg.train.lr_schedule = {{1, 1e-3}};
  const auto corpus = testing_support::toy_corpus(20, 2, 12);
  const auto ae = ToyAutoencoder::train(corpus, cfg);
  EXPECT_EQ(ae.dim(), 8u);
  EXPECT_EQ(ae.encode(corpus[0]), ae.encode(corpus[0]));
  const LatentVector zero(8, 0.0);
  EXPECT_EQ(ae.decode(zero), ae.decode(zero));
  EXPECT_THROW(ae.encode("CCCCCCCCCCCCC"), CapacityError);
  EXPECT_THROW(ae.decode(LatentVector(7, 0.0)), ShapeError);

  testing_support::TempDir dir("toy_ae");
  ae.save(dir.file("ae.json"));
  const auto loaded = ToyAutoencoder::load(dir.file("ae.json"));
  for (const auto& s : corpus) {
    EXPECT_EQ(loaded.encode(s), ae.encode(s));
    EXPECT_EQ(loaded.decode(ae.encode(s)), ae.decode(ae.encode(s)));
  }
  nn::save_model(nn::linear_model(std::vector<double>{1.0}, 0.0), dir.file("plain.json"));
  EXPECT_THROW(ToyAutoencoder::load(dir.file("plain.json")), DataError);
}

TEST(Toy, TrainingCorpusReconstructs) {
  const auto corpus = testing_support::toy_corpus(200, 5);
  const auto ae = ToyAutoencoder::train(corpus, ToyConfig{});
  const auto rep = reconstruction_rate(ae, corpus);
  ASSERT_TRUE(rep.rate.has_value());
  RecordProperty("reconstruction_rate", std::to_string(*rep.rate));
  EXPECT_GE(*rep.rate, 0.9);
  for (const auto& f : rep.failures) EXPECT_EQ(f.reason, "mismatch");
}

TEST(Toy, HeldOutSplitReconstructs) {
  const auto corpus = testing_support::toy_corpus(500, 5);
  const std::vector<std::string> train(corpus.begin(), corpus.begin() + 400);
  const std::vector<std::string> held(corpus.begin() + 400, corpus.end());
  ToyConfig cfg;
  cfg.hidden = 64;
  cfg.latent_dim = 64;
  cfg.train.epochs = 200;
  cfg.train.lr_schedule = {{1, 2e-3}, {151, 5e-4}};
  const auto ae = ToyAutoencoder::train(train, cfg);
  const auto rep = reconstruction_rate(ae, held);
  ASSERT_TRUE(rep.rate.has_value());
  RecordProperty("held_out_rate", std::to_string(*rep.rate));
  std::cout << "held-out reconstruction rate: " << *rep.rate << "\n";
  EXPECT_GE(*rep.rate, 0.5);
}

TEST(Profiles, GapAndWarning) {
  const std::vector<LatentVector> a{LatentVector{1.0, -2.0}, LatentVector{-1.0, 0.0}};
  const auto p = mean_abs_profile(a);
  EXPECT_EQ(p, (std::vector<double>{1.0, 1.0}));
  const auto c = compare_profiles(p, {1.05, 1.5}, 0.1);
  EXPECT_NEAR(c.gap, 0.5, 1e-15);
  EXPECT_EQ(c.worst_index, 1u);
  EXPECT_TRUE(c.warn);
  EXPECT_FALSE(compare_profiles(p, {1.05, 0.95}, 0.1).warn);
  EXPECT_THROW(mean_abs_profile({}), DomainError);
}

TEST(Reencode, FileBackedReencodeStaysInsideHull) {
  const auto codec = random_table(30, 6, 8);
  const auto hull = HullStats::of(codec.vectors());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<LatentVector> gen;
  for (int i = 0; i < 50; ++i) {
    LatentVector v(6);
    for (auto& x : v) x = 10.0 * n01(rng);
    gen.push_back(v);
  }
  const auto rep = reencode_check(codec, gen, hull);
  EXPECT_EQ(rep.n, 50u);
  EXPECT_EQ(rep.outside, 0u);
  EXPECT_FALSE(rep.warn);
  EXPECT_GT(hull.distance(gen[0]), hull.max_radius);
}
