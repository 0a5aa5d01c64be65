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

// SMILES parsing and countable drug-likeness descriptors.
//
// Supported: organic-subset and bracket atoms, charges, explicit H counts,
// branches, ring closures (digits and %nn), explicit bond symbols - = # :,
// dot-disconnected fragments, lowercase aromatic atoms. Stereo marks,
// isotopes, atom classes and wildcard atoms are rejected.

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"

namespace latentgen::smiles {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  double weight;  // standard atomic weight, g/mol
};

// Abridged standard atomic weights.
inline constexpr std::array<ElementInfo, 62> kElements{{
    {"H", 1, 1.008},     {"He", 2, 4.0026},   {"Li", 3, 6.94},     {"Be", 4, 9.0122},   {"B", 5, 10.81},
    {"C", 6, 12.011},    {"N", 7, 14.007},    {"O", 8, 15.999},    {"F", 9, 18.998},    {"Ne", 10, 20.180},
    {"Na", 11, 22.990},  {"Mg", 12, 24.305},  {"Al", 13, 26.982},  {"Si", 14, 28.085},  {"P", 15, 30.974},
    {"S", 16, 32.06},    {"Cl", 17, 35.45},   {"Ar", 18, 39.948},  {"K", 19, 39.098},   {"Ca", 20, 40.078},
    {"Sc", 21, 44.956},  {"Ti", 22, 47.867},  {"V", 23, 50.942},   {"Cr", 24, 51.996},  {"Mn", 25, 54.938},
    {"Fe", 26, 55.845},  {"Co", 27, 58.933},  {"Ni", 28, 58.693},  {"Cu", 29, 63.546},  {"Zn", 30, 65.38},
    {"Ga", 31, 69.723},  {"Ge", 32, 72.630},  {"As", 33, 74.922},  {"Se", 34, 78.971},  {"Br", 35, 79.904},
    {"Kr", 36, 83.798},  {"Rb", 37, 85.468},  {"Sr", 38, 87.62},   {"Y", 39, 88.906},   {"Zr", 40, 91.224},
    {"Nb", 41, 92.906},  {"Mo", 42, 95.95},   {"Ru", 44, 101.07},  {"Rh", 45, 102.91},  {"Pd", 46, 106.42},
    {"Ag", 47, 107.87},  {"Cd", 48, 112.41},  {"In", 49, 114.82},  {"Sn", 50, 118.71},  {"Sb", 51, 121.76},
    {"Te", 52, 127.60},  {"I", 53, 126.904},  {"Xe", 54, 131.29},  {"Cs", 55, 132.91},  {"Ba", 56, 137.33},
    {"Pt", 78, 195.08},  {"Au", 79, 196.97},  {"Hg", 80, 200.59},  {"Tl", 81, 204.38},  {"Pb", 82, 207.2},
    {"Bi", 83, 208.98},  {"Tc", 43, 98.0},
}};

inline const ElementInfo* find_element(std::string_view symbol) {
  for (const auto& e : kElements)
    if (e.symbol == symbol) return &e;
  return nullptr;
}

inline const ElementInfo* find_element(int atomic_number) {
  for (const auto& e : kElements)
    if (e.atomic_number == atomic_number) return &e;
  return nullptr;
}

/// Allowed valences of the main-group elements that take part in the valence
/// model; empty for everything else (no check, no implicit H).
inline std::vector<int> default_valences(int atomic_number) {
  switch (atomic_number) {
    case 1: return {1};
    case 5: return {3};
    case 6: return {4};
    case 7: return {3, 5};
    case 8: return {2};
    case 9: return {1};
    case 14: return {4};
    case 15: return {3, 5};
    case 16: return {2, 4, 6};
    case 17: return {1};
    case 33: return {3, 5};
    case 34: return {2, 4, 6};
    case 35: return {1};
    case 53: return {1};
    default: return {};
  }
}

/// Valences of a charged atom: those of the isoelectronic neighbour
/// (N+ behaves like C, O- like F, ...). Empty when the model does not apply.
inline std::vector<int> charged_valences(int atomic_number, int charge) {
  if (charge == 0) return default_valences(atomic_number);
  const int shifted = atomic_number - charge;
  // Stay within the same period so the shift is meaningful.
  auto period = [](int z) { return z <= 2 ? 1 : z <= 10 ? 2 : z <= 18 ? 3 : z <= 36 ? 4 : 5; };
  if (shifted < 1 || period(shifted) != period(atomic_number)) return {};
  if (default_valences(atomic_number).empty()) return {};
  return default_valences(shifted);
}

enum class BondOrder { Single, Double, Triple, Aromatic };

inline int valence_contribution(BondOrder o) {
  switch (o) {
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    default: return 1;
  }
}

struct Atom {
  std::string element;
  int atomic_number = 0;
  int charge = 0;
  int explicit_h = 0;  // from a bracket H count
  int implicit_h = 0;  // from the valence model (organic subset only)
  bool aromatic = false;
  bool bracket = false;
  std::size_t offset = 0;  // position in the source text

  int total_h() const noexcept { return explicit_h + implicit_h; }
  bool is_hydrogen() const noexcept { return atomic_number == 1; }
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::Single;
  bool in_ring = false;

  std::size_t other(std::size_t i) const noexcept { return i == a ? b : a; }
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  std::size_t atom_count() const noexcept { return atoms.size(); }
  std::size_t bond_count() const noexcept { return bonds.size(); }

  /// Incident bond indices of every atom.
  std::vector<std::vector<std::size_t>> incidence() const {
    std::vector<std::vector<std::size_t>> inc(atoms.size());
    for (std::size_t k = 0; k < bonds.size(); ++k) {
      inc[bonds[k].a].push_back(k);
      inc[bonds[k].b].push_back(k);
    }
    return inc;
  }

  std::size_t components() const {
    std::vector<std::size_t> parent(atoms.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t n = atoms.size();
    for (const auto& b : bonds) {
      const auto ra = find(b.a), rb = find(b.b);
      if (ra != rb) {
        parent[ra] = rb;
        --n;
      }
    }
    return n;
  }

  /// Number of independent cycles: bonds - atoms + components.
  int cycle_rank() const {
    return static_cast<int>(bonds.size()) - static_cast<int>(atoms.size()) + static_cast<int>(components());
  }

  int net_charge() const {
    int q = 0;
    for (const auto& a : atoms) q += a.charge;
    return q;
  }
};

namespace detail {

/// Marks every bond that lies on a cycle (i.e. is not a bridge).
inline void mark_ring_bonds(MolGraph& mol) {
  const auto inc = mol.incidence();
  const std::size_t n = mol.atoms.size();
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  for (auto& b : mol.bonds) b.in_ring = true;
  // Iterative DFS (Tarjan bridges); the stack holds (atom, parent bond, next incidence slot).
  struct Frame {
    std::size_t atom;
    std::ptrdiff_t parent_bond;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < inc[f.atom].size()) {
        const std::size_t k = inc[f.atom][f.next++];
        if (static_cast<std::ptrdiff_t>(k) == f.parent_bond) continue;
        const std::size_t v = mol.bonds[k].other(f.atom);
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({v, static_cast<std::ptrdiff_t>(k), 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const std::size_t u = stack.back().atom;
          low[u] = std::min(low[u], low[done.atom]);
          if (low[done.atom] > disc[u]) mol.bonds[static_cast<std::size_t>(done.parent_bond)].in_ring = false;
        }
      }
    }
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  MolGraph run() {
    if (csv::trim(s_).empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(') {
        if (!prev_) throw ParseError("branch opened before any atom", pos_);
        if (pending_) throw ParseError("bond symbol before '('", pos_);
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == ')') throw ParseError("empty branch", pos_);
        branches_.push_back({*prev_, pos_});
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty()) throw ParseError("unmatched ')'", pos_);
        if (pending_) throw ParseError("dangling bond before ')'", pos_);
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (pending_) throw ParseError("two consecutive bond symbols", pos_);
        if (!prev_) throw ParseError("bond symbol before any atom", pos_);
        pending_ = c == '-' ? BondOrder::Single
                   : c == '=' ? BondOrder::Double
                   : c == '#' ? BondOrder::Triple
                              : BondOrder::Aromatic;
        pending_pos_ = pos_;
        ++pos_;
      } else if (c == '$') {
        throw ParseError("quadruple bonds are not supported", pos_);
      } else if (c == '/' || c == '\\') {
        throw ParseError("stereo bond marks are not supported", pos_);
      } else if (c == '.') {
        if (pending_) throw ParseError("dangling bond before '.'", pos_);
        if (!prev_) throw ParseError("'.' before any atom", pos_);
        prev_.reset();
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_closure();
      } else if (c == '[') {
        bracket_atom();
      } else if (c == '*') {
        throw ParseError("wildcard atoms are not supported", pos_);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        throw ParseError("whitespace inside SMILES", pos_);
      } else {
        organic_atom();
      }
    }
    if (!branches_.empty()) throw ParseError("unmatched '('", branches_.back().second);
    if (!rings_.empty()) throw ParseError("unclosed ring bond " + std::to_string(rings_.begin()->first),
                                          rings_.begin()->second.offset);
    if (pending_) throw ParseError("dangling bond at end of input", pending_pos_);
    finish();
    return std::move(mol_);
  }

 private:
  struct OpenRing {
    std::size_t atom;
    std::optional<BondOrder> order;
    std::size_t offset;
  };

  void add_bond(std::size_t a, std::size_t b, std::optional<BondOrder> order, std::size_t at) {
    if (a == b) throw ParseError("ring bond closes on the same atom", at);
    for (const auto& bd : mol_.bonds)
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) throw ParseError("duplicate bond", at);
    BondOrder o = BondOrder::Single;
    if (order) {
      o = *order;
    } else if (mol_.atoms[a].aromatic && mol_.atoms[b].aromatic) {
      o = BondOrder::Aromatic;
    }
    mol_.bonds.push_back(Bond{a, b, o, false});
    explicit_order_.push_back(order.has_value());
  }

  void attach(Atom atom) {
    mol_.atoms.push_back(std::move(atom));
    const std::size_t idx = mol_.atoms.size() - 1;
    if (prev_) add_bond(*prev_, idx, pending_, mol_.atoms[idx].offset);
    pending_.reset();
    prev_ = idx;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    int label = 0;
    if (s_[pos_] == '%') {
      if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
        throw ParseError("'%' must be followed by two digits", pos_);
      }
      label = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      label = s_[pos_] - '0';
      ++pos_;
    }
    if (!prev_) throw ParseError("ring bond before any atom", start);
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, OpenRing{*prev_, pending_, start});
    } else {
      const OpenRing open = it->second;
      rings_.erase(it);
      std::optional<BondOrder> order = open.order;
      if (pending_) {
        if (order && *order != *pending_) throw ParseError("conflicting ring bond orders", start);
        order = pending_;
      }
      add_bond(open.atom, *prev_, order, start);
    }
    pending_.reset();
  }

  void organic_atom() {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    std::string sym;
    bool aromatic = false;
    if (c == 'C' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'l') {
      sym = "Cl";
    } else if (c == 'B' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'r') {
      sym = "Br";
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      sym = std::string(1, c);
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      sym = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      aromatic = true;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
    pos_ += sym.size();
    const auto* el = find_element(sym);
    Atom a;
    a.element = sym;
    a.atomic_number = el->atomic_number;
    a.aromatic = aromatic;
    a.offset = start;
    attach(std::move(a));
  }

  int read_int() {
    int v = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      ++pos_;
      any = true;
    }
    return any ? v : -1;
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      throw ParseError("isotopes are not supported", pos_);
    }
    if (pos_ >= s_.size()) throw ParseError("unterminated bracket atom", start);
    if (s_[pos_] == '*') throw ParseError("wildcard atoms are not supported", pos_);

    Atom a;
    a.bracket = true;
    a.offset = start;
    // Element symbol: uppercase letter plus optional lowercase, or an aromatic form.
    const char c0 = s_[pos_];
    if (std::isupper(static_cast<unsigned char>(c0))) {
      std::string two;
      if (pos_ + 1 < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        two = std::string{c0, s_[pos_ + 1]};
      }
      if (!two.empty() && find_element(two)) {
        a.element = two;
        pos_ += 2;
      } else if (find_element(std::string(1, c0))) {
        a.element = std::string(1, c0);
        pos_ += 1;
      } else {
        throw ParseError("unknown element", pos_);
      }
    } else if (std::islower(static_cast<unsigned char>(c0))) {
      const std::string_view rest = s_.substr(pos_);
      if (rest.starts_with("se")) {
        a.element = "Se";
        pos_ += 2;
      } else if (rest.starts_with("as")) {
        a.element = "As";
        pos_ += 2;
      } else if (std::string_view("bcnops").find(c0) != std::string_view::npos) {
        a.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c0))));
        pos_ += 1;
      } else {
        throw ParseError("unknown aromatic element", pos_);
      }
      a.aromatic = true;
    } else {
      throw ParseError("expected element symbol in bracket atom", pos_);
    }
    a.atomic_number = find_element(a.element)->atomic_number;

    if (pos_ < s_.size() && s_[pos_] == '@') throw ParseError("chirality is not supported", pos_);
    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      const int n = read_int();
      a.explicit_h = n < 0 ? 1 : n;
    }
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_];
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      const int n = read_int();
      if (n >= 0) {
        a.charge = unit * n;
      } else {
        int count = 1;
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++count;
          ++pos_;
        }
        a.charge = unit * count;
      }
    }
    if (pos_ < s_.size() && s_[pos_] == ':') throw ParseError("atom classes are not supported", pos_);
    if (pos_ >= s_.size() || s_[pos_] != ']') throw ParseError("malformed bracket atom", pos_ < s_.size() ? pos_ : start);
    ++pos_;
    attach(std::move(a));
  }

  void finish() {
    mark_ring_bonds(mol_);
    for (std::size_t k = 0; k < mol_.bonds.size(); ++k) {
      auto& b = mol_.bonds[k];
      // Implicit aromatic bonds between rings (biphenyl-style) are single bonds.
      if (b.order == BondOrder::Aromatic && !b.in_ring) {
        if (explicit_order_[k]) throw ParseError("aromatic bond outside a ring", mol_.atoms[b.b].offset);
        b.order = BondOrder::Single;
      }
    }
    const auto inc = mol_.incidence();
    for (std::size_t i = 0; i < mol_.atoms.size(); ++i) {
      auto& atom = mol_.atoms[i];
      int bond_sum = 0;
      bool in_ring = false;
      for (auto k : inc[i]) {
        bond_sum += valence_contribution(mol_.bonds[k].order);
        in_ring = in_ring || mol_.bonds[k].in_ring;
      }
      if (atom.aromatic && !in_ring) throw ParseError("aromatic atom outside a ring", atom.offset);

      if (atom.bracket) {
        const auto allowed = charged_valences(atom.atomic_number, atom.charge);
        if (!allowed.empty() && bond_sum + atom.explicit_h > allowed.back()) {
          throw ParseError("valence overflow on " + atom.element, atom.offset);
        }
        continue;
      }
      const auto allowed = default_valences(atom.atomic_number);
      if (atom.aromatic) {
        // One valence unit goes to the delocalized pi system.
        if (bond_sum + 1 > allowed.back()) throw ParseError("valence overflow on aromatic " + atom.element, atom.offset);
        atom.implicit_h = std::max(0, allowed.front() - bond_sum - 1);
        continue;
      }
      auto v = std::find_if(allowed.begin(), allowed.end(), [&](int val) { return val >= bond_sum; });
      if (v == allowed.end()) throw ParseError("valence overflow on " + atom.element, atom.offset);
      atom.implicit_h = *v - bond_sum;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MolGraph mol_;
  std::vector<bool> explicit_order_;
  std::optional<std::size_t> prev_;
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> branches_;  // (atom, offset of '(')
  std::map<int, OpenRing> rings_;
};

}  // namespace detail

inline MolGraph parse(std::string_view smiles) { return detail::Parser(smiles).run(); }

/// True when `smiles` parses; never throws.
inline bool is_parseable(std::string_view smiles) noexcept {
  try {
    parse(smiles);
    return true;
  } catch (...) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------
struct DescriptorSet {
  double mw = 0.0;
  int n_ha = 0;
  int n_hd = 0;
  int n_het = 0;
  int f_char = 0;
  int n_ring = 0;
  int n_rot = 0;

  friend bool operator==(const DescriptorSet&, const DescriptorSet&) = default;
};

inline DescriptorSet descriptors(const MolGraph& mol) {
  static const double kHydrogen = find_element("H")->weight;
  DescriptorSet d;
  const auto inc = mol.incidence();
  std::vector<int> heavy_degree(mol.atoms.size(), 0);
  std::vector<int> h_neighbors(mol.atoms.size(), 0);
  std::vector<bool> has_triple(mol.atoms.size(), false);
  for (const auto& b : mol.bonds) {
    const bool ha = mol.atoms[b.a].is_hydrogen();
    const bool hb = mol.atoms[b.b].is_hydrogen();
    if (!hb) ++heavy_degree[b.a];
    if (!ha) ++heavy_degree[b.b];
    if (hb) ++h_neighbors[b.a];
    if (ha) ++h_neighbors[b.b];
    if (b.order == BondOrder::Triple) has_triple[b.a] = has_triple[b.b] = true;
  }
  for (std::size_t i = 0; i < mol.atoms.size(); ++i) {
    const auto& a = mol.atoms[i];
    d.mw += find_element(a.element)->weight + a.total_h() * kHydrogen;
    d.f_char += a.charge;
    if (a.is_hydrogen()) continue;
    const bool n_or_o = a.atomic_number == 7 || a.atomic_number == 8;
    if (n_or_o) {
      ++d.n_ha;
      d.n_hd += a.total_h() + h_neighbors[i];
    }
    if (a.atomic_number != 6) ++d.n_het;
  }
  d.n_ring = mol.cycle_rank();
  for (const auto& b : mol.bonds) {
    if (b.order != BondOrder::Single || b.in_ring) continue;
    if (mol.atoms[b.a].is_hydrogen() || mol.atoms[b.b].is_hydrogen()) continue;
    if (heavy_degree[b.a] < 2 || heavy_degree[b.b] < 2) continue;
    if (has_triple[b.a] || has_triple[b.b]) continue;
    ++d.n_rot;
  }
  return d;
}

inline DescriptorSet descriptors(std::string_view smiles) { return descriptors(parse(smiles)); }

inline constexpr std::string_view kDescriptorHeader = "smiles,mw,n_ha,n_hd,n_het,f_char,n_ring,n_rot";

inline std::string descriptor_row(std::string_view smiles, const DescriptorSet& d) {
  std::ostringstream out;
  out << smiles << ',' << csv::format_fixed(d.mw, 3) << ',' << d.n_ha << ',' << d.n_hd << ',' << d.n_het << ','
      << d.f_char << ',' << d.n_ring << ',' << d.n_rot;
  return out.str();
}

// ---------------------------------------------------------------------------
// Lipinski's rule of five
// ---------------------------------------------------------------------------
struct LipinskiInputs {
  double mw = 0.0;
  std::optional<double> log_p;
  int n_hd = 0;
  int n_ha = 0;
};

struct LipinskiResult {
  bool mw_ok = false;
  std::optional<bool> log_p_ok;  // empty when logP was not supplied
  bool hd_ok = false;
  bool ha_ok = false;
  Status status = Status::Indeterminate;

  int violations() const noexcept {
    return !mw_ok + (log_p_ok && !*log_p_ok) + !hd_ok + !ha_ok;
  }
};

inline constexpr double kLipinskiMaxMw = 500.0;
inline constexpr double kLipinskiMaxLogP = 5.0;
inline constexpr int kLipinskiMaxHd = 5;
inline constexpr int kLipinskiMaxHa = 10;

/// All four rules are inclusive (<=). A known violation fails outright; a
/// missing or non-finite logP otherwise leaves the verdict indeterminate.
inline LipinskiResult lipinski(const LipinskiInputs& in) {
  LipinskiResult r;
  r.mw_ok = in.mw <= kLipinskiMaxMw;
  r.hd_ok = in.n_hd <= kLipinskiMaxHd;
  r.ha_ok = in.n_ha <= kLipinskiMaxHa;
  if (in.log_p && std::isfinite(*in.log_p)) r.log_p_ok = *in.log_p <= kLipinskiMaxLogP;
  if (r.violations() > 0) {
    r.status = Status::Fail;
  } else {
    r.status = r.log_p_ok ? Status::Pass : Status::Indeterminate;
  }
  return r;
}

inline LipinskiResult lipinski(const DescriptorSet& d, std::optional<double> log_p) {
  return lipinski(LipinskiInputs{d.mw, log_p, d.n_hd, d.n_ha});
}

}  // namespace latentgen::smiles
