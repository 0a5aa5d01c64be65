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
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "smiles_corpus.hpp"
#include "latentgen/smiles.hpp"

using namespace latentgen;
using namespace latentgen::smiles;
using testing_support::formula_weight;
using testing_support::hand_corpus;

namespace {

// Number of even-degree edge subsets (the cycle space) is 2^rank.
int brute_force_cycle_rank(const MolGraph& m) {
  const std::size_t e = m.bonds.size();
  std::size_t even = 0;
  for (std::uint32_t mask = 0; mask < (1u << e); ++mask) {
    std::vector<int> deg(m.atoms.size(), 0);
    for (std::size_t k = 0; k < e; ++k)
      if (mask >> k & 1u) {
        ++deg[m.bonds[k].a];
        ++deg[m.bonds[k].b];
      }
    bool ok = true;
    for (int d : deg) ok = ok && d % 2 == 0;
    even += ok;
  }
  return static_cast<int>(std::lround(std::log2(static_cast<double>(even))));
}

// A bond lies on a ring iff some element of the cycle space contains it.
std::vector<bool> brute_force_ring_bonds(const MolGraph& m) {
  const std::size_t e = m.bonds.size();
  std::vector<bool> in_ring(e, false);
  for (std::uint32_t mask = 1; mask < (1u << e); ++mask) {
    std::vector<int> deg(m.atoms.size(), 0);
    for (std::size_t k = 0; k < e; ++k)
      if (mask >> k & 1u) {
        ++deg[m.bonds[k].a];
        ++deg[m.bonds[k].b];
      }
    bool ok = true;
    for (int d : deg) ok = ok && d % 2 == 0;
    if (!ok) continue;
    for (std::size_t k = 0; k < e; ++k)
      if (mask >> k & 1u) in_ring[k] = true;
  }
  return in_ring;
}

}  // namespace

TEST(Parse, Examples) {
  const auto methane = parse("C");
  ASSERT_EQ(methane.atom_count(), 1u);
  EXPECT_EQ(methane.atoms[0].element, "C");
  EXPECT_EQ(methane.atoms[0].implicit_h, 4);

  const auto hexane = parse("C1CCCCC1");
  EXPECT_EQ(hexane.atom_count(), 6u);
  EXPECT_EQ(hexane.bond_count(), 6u);
  EXPECT_EQ(hexane.cycle_rank(), 1);

  const auto acetate = parse("CC(=O)[O-]");
  EXPECT_EQ(acetate.atom_count(), 4u);
  EXPECT_EQ(acetate.net_charge(), -1);
  int doubles = 0;
  for (const auto& b : acetate.bonds) doubles += b.order == BondOrder::Double;
  EXPECT_EQ(doubles, 1);
}

TEST(Parse, ErrorsCarryOffsets) {
  const std::vector<std::pair<std::string, std::size_t>> bad{
      {"CC(C", 2}, {"CC)", 2}, {"C1CC", 1}, {"C[Xx]", 2}, {"C(C)(C)(C)(C)C", 0}, {"", 0},
  };
  for (const auto& [s, off] : bad) {
    try {
      parse(s);
      ADD_FAILURE() << s << " parsed";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.offset(), off) << s << ": " << e.what();
    }
  }
  for (const char* s : {"C[C@H](O)N", "[13CH4]", "*C", "cc", "F/C=C/F"}) {
    EXPECT_THROW(parse(s), ParseError) << s;
    EXPECT_FALSE(is_parseable(s)) << s;
  }
  EXPECT_TRUE(is_parseable("C%10CC%10"));
}

TEST(Descriptors, HandComputedCorpus) {
  for (const auto& e : hand_corpus()) {
    SCOPED_TRACE(e.smiles);
    const auto d = descriptors(e.smiles);
    EXPECT_NEAR(d.mw, formula_weight(e.formula), 1e-9);
    EXPECT_EQ(d.n_ha, e.n_ha);
    EXPECT_EQ(d.n_hd, e.n_hd);
    EXPECT_EQ(d.n_het, e.n_het);
    EXPECT_EQ(d.f_char, e.f_char);
    EXPECT_EQ(d.n_ring, e.n_ring);
    EXPECT_EQ(d.n_rot, e.n_rot);
  }
}

TEST(Descriptors, PublishedExamples) {
  EXPECT_NEAR(descriptors("C").mw, 16.043, 5e-4);
  const auto ethanol = descriptors("CCO");
  EXPECT_NEAR(ethanol.mw, 46.069, 5e-4);
  EXPECT_EQ(ethanol.n_rot, 0);
  EXPECT_NEAR(descriptors("CC(C)Cc1ccc(cc1)C(C)C(=O)O").mw, 206.28, 0.01);
  EXPECT_EQ(descriptor_row("CCO", ethanol), "CCO,46.069,1,1,1,0,0,0");
  EXPECT_EQ(kDescriptorHeader, "smiles,mw,n_ha,n_hd,n_het,f_char,n_ring,n_rot");
}

TEST(DescriptorProperty, CycleRankAndRingBondsMatchBruteForce) {
  auto corpus = testing_support::toy_corpus(150, 17);
  for (const auto& e : hand_corpus()) corpus.push_back(e.smiles);
  std::size_t checked = 0;
  for (const auto& s : corpus) {
    const auto m = parse(s);
    if (m.atom_count() > 12 || m.bond_count() > 18) continue;
    ++checked;
    EXPECT_EQ(m.cycle_rank(), brute_force_cycle_rank(m)) << s;
    EXPECT_EQ(m.cycle_rank(), testing_support::dfs_cycle_count(m)) << s;
    const auto ring = brute_force_ring_bonds(m);
    for (std::size_t k = 0; k < m.bond_count(); ++k) EXPECT_EQ(m.bonds[k].in_ring, ring[k]) << s << " bond " << k;
  }
  EXPECT_GE(checked, 100u);
}

TEST(DescriptorProperty, ParseIsDeterministic) {
  for (const auto& s : testing_support::toy_corpus(50, 3)) {
    const auto a = parse(s), b = parse(s);
    ASSERT_EQ(a.atom_count(), b.atom_count());
    ASSERT_EQ(a.bond_count(), b.bond_count());
    for (std::size_t i = 0; i < a.atom_count(); ++i) {
      EXPECT_EQ(a.atoms[i].element, b.atoms[i].element);
      EXPECT_EQ(a.atoms[i].implicit_h, b.atoms[i].implicit_h);
      EXPECT_EQ(a.atoms[i].aromatic, b.atoms[i].aromatic);
    }
    for (std::size_t k = 0; k < a.bond_count(); ++k) {
      EXPECT_EQ(a.bonds[k].a, b.bonds[k].a);
      EXPECT_EQ(a.bonds[k].b, b.bonds[k].b);
      EXPECT_EQ(a.bonds[k].order, b.bonds[k].order);
    }
    EXPECT_EQ(descriptors(a), descriptors(b));
  }
}

TEST(DescriptorProperty, MolecularWeightIsAdditive) {
  const auto corpus = testing_support::toy_corpus(60, 9);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto& a = corpus[rng() % corpus.size()];
    const auto& b = corpus[rng() % corpus.size()];
    const auto da = descriptors(a), db = descriptors(b), dab = descriptors(a + "." + b);
    EXPECT_NEAR(dab.mw, da.mw + db.mw, 1e-9);
    EXPECT_EQ(dab.n_ha, da.n_ha + db.n_ha);
    EXPECT_EQ(dab.n_ring, da.n_ring + db.n_ring);
  }
}

TEST(DescriptorProperty, InvariantUnderRewriting) {
  const std::vector<std::pair<std::string, std::string>> same{
      {"OCC", "CCO"},
      {"C(C)O", "OCC"},
      {"c1ccccc1O", "Oc1ccccc1"},
      {"CC(=O)O", "OC(C)=O"},
      {"NCC(=O)O", "OC(=O)CN"},
      {"C1CCNCC1", "N1CCCCC1"},
      {"CC(C)Cc1ccc(cc1)C(C)C(=O)O", "OC(=O)C(C)c1ccc(CC(C)C)cc1"},
      {"CC(=O)Nc1ccc(O)cc1", "Oc1ccc(NC(C)=O)cc1"},
  };
  for (const auto& [a, b] : same) {
    const auto da = descriptors(a), db = descriptors(b);
    EXPECT_EQ(da.n_ha, db.n_ha) << a << " vs " << b;
    EXPECT_EQ(da.n_hd, db.n_hd) << a << " vs " << b;
    EXPECT_EQ(da.n_het, db.n_het);
    EXPECT_EQ(da.n_ring, db.n_ring);
    EXPECT_EQ(da.n_rot, db.n_rot);
    EXPECT_NEAR(da.mw, db.mw, 1e-9);
  }
}

TEST(Lipinski, Examples) {
  const auto ref = lipinski(LipinskiInputs{300.140, 4.464, 0, 2});
  EXPECT_EQ(ref.status, Status::Pass);
  EXPECT_EQ(ref.violations(), 0);

  const auto heavy = lipinski(LipinskiInputs{501.0, 0.0, 0, 0});
  EXPECT_EQ(heavy.status, Status::Fail);
  EXPECT_FALSE(heavy.mw_ok);
  EXPECT_TRUE(*heavy.log_p_ok);
  EXPECT_TRUE(heavy.hd_ok);
  EXPECT_TRUE(heavy.ha_ok);
  EXPECT_EQ(heavy.violations(), 1);

  EXPECT_EQ(lipinski(LipinskiInputs{500.0, 5.0, 5, 10}).status, Status::Pass);
  EXPECT_EQ(lipinski(LipinskiInputs{500.0, 5.0001, 5, 10}).status, Status::Fail);
  EXPECT_EQ(lipinski(LipinskiInputs{500.0, 5.0, 6, 10}).status, Status::Fail);
  EXPECT_EQ(lipinski(LipinskiInputs{500.0, 5.0, 5, 11}).status, Status::Fail);
}

TEST(Lipinski, MissingLogPIsNeverASilentPass) {
  const auto r = lipinski(LipinskiInputs{300.0, std::nullopt, 1, 2});
  EXPECT_EQ(r.status, Status::Indeterminate);
  EXPECT_FALSE(r.log_p_ok.has_value());
  EXPECT_EQ(lipinski(LipinskiInputs{300.0, std::nan(""), 1, 2}).status, Status::Indeterminate);
  EXPECT_EQ(lipinski(LipinskiInputs{600.0, std::nullopt, 1, 2}).status, Status::Fail);
  EXPECT_EQ(lipinski(descriptors("CCO"), 0.3).status, Status::Pass);
  EXPECT_EQ(to_string(Status::Indeterminate), "indeterminate");
}
