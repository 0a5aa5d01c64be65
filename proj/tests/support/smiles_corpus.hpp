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

// Hand-curated SMILES corpus with independently derived descriptors.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "latentgen/smiles.hpp"

namespace testing_support {

// Hand-derived molecular formula and counts for each molecule.
struct ExpectedDescriptors {
  std::string smiles;
  std::map<std::string, int> formula;
  int n_ha, n_hd, n_het, f_char, n_ring, n_rot;
};

inline double formula_weight(const std::map<std::string, int>& f) {
  static const std::map<std::string, double> w{{"C", 12.011}, {"H", 1.008},  {"N", 14.007}, {"O", 15.999},
                                               {"F", 18.998}, {"S", 32.06},  {"Cl", 35.45}, {"Na", 22.990}};
  double s = 0.0;
  for (const auto& [el, n] : f) s += w.at(el) * n;
  return s;
}

inline const std::vector<ExpectedDescriptors>& hand_corpus() {
  static const std::vector<ExpectedDescriptors> c{
      {"C", {{"C", 1}, {"H", 4}}, 0, 0, 0, 0, 0, 0},
      {"CCO", {{"C", 2}, {"H", 6}, {"O", 1}}, 1, 1, 1, 0, 0, 0},
      {"c1ccccc1O", {{"C", 6}, {"H", 6}, {"O", 1}}, 1, 1, 1, 0, 1, 0},
      {"C1CCCCC1", {{"C", 6}, {"H", 12}}, 0, 0, 0, 0, 1, 0},
      {"CC(=O)[O-]", {{"C", 2}, {"H", 3}, {"O", 2}}, 2, 0, 2, -1, 0, 0},
      {"CC(=O)O", {{"C", 2}, {"H", 4}, {"O", 2}}, 2, 1, 2, 0, 0, 0},
      {"CCCC", {{"C", 4}, {"H", 10}}, 0, 0, 0, 0, 0, 1},
      {"CCN(CC)CC", {{"C", 6}, {"H", 15}, {"N", 1}}, 1, 0, 1, 0, 0, 3},
      {"c1ccncc1", {{"C", 5}, {"H", 5}, {"N", 1}}, 1, 0, 1, 0, 1, 0},
      {"C[NH3+]", {{"C", 1}, {"H", 6}, {"N", 1}}, 1, 3, 1, 1, 0, 0},
      {"CC#N", {{"C", 2}, {"H", 3}, {"N", 1}}, 1, 0, 1, 0, 0, 0},
      {"CCCC#N", {{"C", 4}, {"H", 7}, {"N", 1}}, 1, 0, 1, 0, 0, 1},
      {"c1ccc2ccccc2c1", {{"C", 10}, {"H", 8}}, 0, 0, 0, 0, 2, 0},
      {"OCCO", {{"C", 2}, {"H", 6}, {"O", 2}}, 2, 2, 2, 0, 0, 1},
      {"NCCN", {{"C", 2}, {"H", 8}, {"N", 2}}, 2, 4, 2, 0, 0, 1},
      {"CC(C)Cc1ccc(cc1)C(C)C(=O)O", {{"C", 13}, {"H", 18}, {"O", 2}}, 2, 1, 2, 0, 1, 4},
      {"O=C(C)Oc1ccccc1C(=O)O", {{"C", 9}, {"H", 8}, {"O", 4}}, 4, 1, 4, 0, 1, 3},
      {"CN1C=NC2=C1C(=O)N(C(=O)N2C)C", {{"C", 8}, {"H", 10}, {"N", 4}, {"O", 2}}, 6, 0, 6, 0, 2, 0},
      {"C1CC1", {{"C", 3}, {"H", 6}}, 0, 0, 0, 0, 1, 0},
      {"C1CC2CCC1C2", {{"C", 7}, {"H", 12}}, 0, 0, 0, 0, 2, 0},
      {"[Na+].[Cl-]", {{"Na", 1}, {"Cl", 1}}, 0, 0, 2, 0, 0, 0},
      {"CC(=O)Nc1ccc(O)cc1", {{"C", 8}, {"H", 9}, {"N", 1}, {"O", 2}}, 3, 2, 3, 0, 1, 2},
      {"OC(=O)C(F)(F)F", {{"C", 2}, {"H", 1}, {"F", 3}, {"O", 2}}, 2, 1, 5, 0, 0, 1},
      {"CS(=O)(=O)C", {{"C", 2}, {"H", 6}, {"O", 2}, {"S", 1}}, 2, 0, 3, 0, 0, 0},
      {"CCS", {{"C", 2}, {"H", 6}, {"S", 1}}, 0, 0, 1, 0, 0, 0},
      {"c1ccc(cc1)-c1ccccc1", {{"C", 12}, {"H", 10}}, 0, 0, 0, 0, 2, 1},
      {"[NH4+]", {{"N", 1}, {"H", 4}}, 1, 4, 1, 1, 0, 0},
      {"C1CCC2(CC1)CCCC2", {{"C", 10}, {"H", 18}}, 0, 0, 0, 0, 2, 0},
      {"[H]OC", {{"C", 1}, {"H", 4}, {"O", 1}}, 1, 1, 1, 0, 0, 0},
  };
  return c;
}

/// Independent cycles counted as non-tree edges of a depth-first traversal.
inline int dfs_cycle_count(const latentgen::smiles::MolGraph& m) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(m.atoms.size());
  for (std::size_t k = 0; k < m.bonds.size(); ++k) {
    adj[m.bonds[k].a].push_back({m.bonds[k].b, k});
    adj[m.bonds[k].b].push_back({m.bonds[k].a, k});
  }
  std::vector<bool> seen(m.atoms.size(), false), used(m.bonds.size(), false);
  int back_edges = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    seen[v] = true;
    for (auto [w, k] : adj[v]) {
      if (used[k]) continue;
      used[k] = true;
      if (seen[w]) ++back_edges;
      else visit(w);
    }
  };
  for (std::size_t v = 0; v < m.atoms.size(); ++v)
    if (!seen[v]) visit(v);
  return back_edges;
}

}  // namespace testing_support
