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
#include <limits>
#include <random>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"
#include "latentgen/latent_io.hpp"
#include "latentgen/random.hpp"

using namespace latentgen;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

TEST(Affinity, KiToDeltaGMatchesPublishedCutoffs) {
  EXPECT_NEAR(ki_to_delta_g(1e-7), -9.5431, 5e-5);
  EXPECT_NEAR(ki_to_delta_g(1e-6), -8.1798, 5e-5);
  EXPECT_EQ(std::round(ki_to_delta_g(1e-7) * 100) / 100, -9.54);
  EXPECT_EQ(std::round(ki_to_delta_g(1e-6) * 100) / 100, -8.18);
  EXPECT_EQ(ki_to_delta_g(1.0), 0.0);
}

TEST(Affinity, KiToDeltaGRejectsNonPositive) {
  for (double bad : {0.0, -1e-7, kNaN, kInf, -kInf}) EXPECT_THROW(ki_to_delta_g(bad), DomainError) << bad;
}

TEST(Affinity, Ic50Halving) {
  EXPECT_DOUBLE_EQ(ic50_to_ki(2e-6), 1e-6);
  EXPECT_DOUBLE_EQ(ic50_to_ki(0.2), 0.1);
  EXPECT_NEAR(ki_to_delta_g(ic50_to_ki(2e-7)), -9.5431, 5e-5);
  for (double bad : {0.0, -3.0, kNaN}) EXPECT_THROW(ic50_to_ki(bad), DomainError);
}

TEST(Affinity, MicromolarConversion) { EXPECT_DOUBLE_EQ(micromolar_to_molar(0.1), 1e-7); }

TEST(AffinityProperty, StrictlyIncreasingAndIc50Offset) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> expo(-12.0, 2.0);
  const double offset = kDeltaGPerLog10Ki * std::log10(2.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::pow(10.0, expo(rng));
    const double b = std::pow(10.0, expo(rng));
    if (a < b) {
      EXPECT_LT(ki_to_delta_g(a), ki_to_delta_g(b));
    } else if (a > b) {
      EXPECT_GT(ki_to_delta_g(a), ki_to_delta_g(b));
    }
    EXPECT_NEAR(ki_to_delta_g(ic50_to_ki(a)), ki_to_delta_g(a) - offset, 1e-12);
  }
}

TEST(Cosine, Examples) {
  const LatentVector v{0.3, -1.2, 4.0};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(LatentVector{1, 0}, LatentVector{0, 1}), 0.0);
  // 32 / (sqrt(14) sqrt(77))
  EXPECT_NEAR(cosine_similarity(LatentVector{1, 2, 3}, LatentVector{4, 5, 6}), 0.974632, 1e-6);
  EXPECT_NEAR(cosine_similarity(LatentVector{1, 2}, LatentVector{-2, -4}), -1.0, 1e-15);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine_similarity(LatentVector{0, 0}, LatentVector{1, 0}), DomainError);
  EXPECT_THROW(cosine_similarity(LatentVector{1, 0}, LatentVector{0, 0}), DomainError);
  EXPECT_THROW(cosine_similarity(LatentVector{1, 0}, LatentVector{1, 0, 0}), ShapeError);
}

TEST(CosineProperty, SymmetricScaleInvariantBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + trial % 17;
    LatentVector a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = n01(rng);
      b[i] = n01(rng);
    }
    const double s = cosine_similarity(a, b);
    EXPECT_LE(std::abs(s), 1.0);
    EXPECT_DOUBLE_EQ(s, cosine_similarity(b, a));
    const double ka = scale(rng), kb = scale(rng);
    LatentVector sa = a, sb = b;
    for (auto& x : sa) x *= ka;
    for (auto& x : sb) x *= kb;
    EXPECT_NEAR(cosine_similarity(sa, sb), s, 1e-12);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> rev{3, 2, 1};
  EXPECT_NEAR(pearson_r(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r(x, rev), -1.0, 1e-15);
  // sxy = 6.5, sxx = 5, syy = 8.75
  EXPECT_NEAR(pearson_r(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 5}), 0.982708, 1e-6);
}

TEST(Pearson, Errors) {
  EXPECT_THROW(pearson_r(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), DomainError);
  EXPECT_THROW(pearson_r(std::vector<double>{1}, std::vector<double>{2}), DomainError);
  EXPECT_THROW(pearson_r(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(PearsonProperty, AffineInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = n01(rng);
      y[i] = 0.5 * x[i] + n01(rng);
    }
    const double r = pearson_r(x, y);
    EXPECT_LE(std::abs(r), 1.0 + 1e-12);
    const double a = pos(rng), b = n01(rng) * 10;
    std::vector<double> x2(n);
    for (std::size_t i = 0; i < n; ++i) x2[i] = a * x[i] + b;
    EXPECT_NEAR(pearson_r(x2, y), r, 1e-9);
  }
}

TEST(Rmse, Examples) {
  const std::vector<double> y{1.5, -2.0, 3.0};
  EXPECT_EQ(rmse(y, y), 0.0);
  EXPECT_NEAR(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}), std::sqrt(12.5), 1e-15);
  EXPECT_EQ(rmse(std::vector<double>{1}, std::vector<double>{0}), 1.0);
  EXPECT_THROW(rmse(std::vector<double>{1, 2}, std::vector<double>{1}), ShapeError);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST(RmseProperty, SymmetricAndZeroIffEqual) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 25;
    std::vector<double> y(n), yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = n01(rng);
      yhat[i] = n01(rng);
    }
    EXPECT_EQ(rmse(y, yhat), rmse(yhat, y));
    EXPECT_GT(rmse(y, yhat), 0.0);
    EXPECT_EQ(rmse(y, y), 0.0);
  }
}

TEST(Metrics, EvaluateReport) {
  const auto rep = evaluate(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 5});
  EXPECT_EQ(rep.n, 4u);
  EXPECT_NEAR(rep.pearson_r, 0.982708, 1e-6);
  EXPECT_NEAR(rep.rmse, 0.5, 1e-15);
}

TEST(LatentVectorTest, BasicsAndFiniteness) {
  LatentVector v(4, 1.5);
  EXPECT_EQ(v.dim(), 4u);
  EXPECT_TRUE(v.all_finite());
  v[2] = kNaN;
  EXPECT_FALSE(v.all_finite());
  EXPECT_THROW(require_finite(v, "test"), DataError);
  EXPECT_THROW(require_same_dim(3, 4, "test"), ShapeError);
  EXPECT_EQ(kDefaultLatentDim, 512u);
}

TEST(Seeds, DeriveSeedIsDeterministicAndSpreads) {
  EXPECT_EQ(derive_seed(1, "a", 2), derive_seed(1, "a", 2));
  EXPECT_NE(derive_seed(1, "a", 2), derive_seed(1, "a", 3));
  EXPECT_NE(derive_seed(1, "a", 2), derive_seed(1, "b", 2));
  EXPECT_NE(derive_seed(1, "a", 2), derive_seed(2, "a", 2));
}

TEST(Csv, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 1000; ++i) {
    const double x = n01(rng) * std::pow(10.0, i % 20 - 10);
    EXPECT_EQ(csv::parse_double(csv::format_double(x), "t"), x);
  }
  EXPECT_EQ(csv::format_double(kInf), "inf");
  EXPECT_EQ(csv::format_double(-kInf), "-inf");
  EXPECT_EQ(csv::format_double(kNaN), "nan");
  EXPECT_TRUE(std::isnan(csv::parse_double("", "t")));
}

TEST(Csv, ParseReportsLineNumbers) {
  std::istringstream in("a,b\n1,2\n\n# comment\n3\n");
  try {
    csv::parse(in, "mem.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("mem.csv: line 5"), std::string::npos) << e.what();
  }
  std::istringstream ok("a,b\n\"x,y\",2\n");
  const auto t = csv::parse(ok);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "x,y");
  EXPECT_THROW(csv::parse_double("1.5x", "t"), DataError);
}

TEST(LatentIo, RoundTrip) {
  const std::vector<std::string> ids{"a", "b"};
  const std::vector<LatentVector> vs{LatentVector{0.1, -2.5, 1e-300}, LatentVector{3.0, 0.0, -0.0}};
  const auto text = format_latent_csv(ids, vs);
  EXPECT_EQ(text.substr(0, text.find('\n')), "id,v0,v1,v2");
  std::istringstream in(text);
  const auto table = parse_latent_table(csv::parse(in), "mem");
  EXPECT_EQ(table.ids, ids);
  EXPECT_EQ(table.vectors, vs);
}

TEST(LatentIo, RejectsBadHeaderAndNonFinite) {
  std::istringstream bad_header("id,v0,v2\na,1,2\n");
  EXPECT_THROW(parse_latent_table(csv::parse(bad_header), "mem"), DataError);
  std::istringstream nan_row("id,v0\na,nan\n");
  EXPECT_THROW(parse_latent_table(csv::parse(nan_row), "mem"), DataError);
}
