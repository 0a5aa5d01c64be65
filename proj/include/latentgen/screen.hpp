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

// Multi-target screening: affinity cutoffs, property bands, novelty and
// lead ranking.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"
#include "latentgen/smiles.hpp"

namespace latentgen::screen {

enum class Target { DAT = 0, NET = 1, SERT = 2, hERG = 3 };

inline constexpr std::size_t kTargetCount = 4;
inline constexpr std::array<Target, kTargetCount> kTargets{Target::DAT, Target::NET, Target::SERT, Target::hERG};
inline constexpr std::array<std::string_view, kTargetCount> kTargetNames{"dat", "net", "sert", "herg"};

inline std::string_view to_string(Target t) { return kTargetNames[static_cast<std::size_t>(t)]; }

inline Target target_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTargetCount; ++i)
    if (kTargetNames[i] == s) return kTargets[i];
  throw ConfigError("unknown target '" + std::string(s) + "' (expected dat, net, sert or herg)");
}

// ---------------------------------------------------------------------------
// Affinity
// ---------------------------------------------------------------------------

struct TargetThresholds {
  double active_cutoff = -9.54;  // DAT, NET, SERT: dG < cutoff
  double herg_cutoff = -8.18;    // hERG: dG > cutoff

  void validate() const {
    if (!std::isfinite(active_cutoff) || !std::isfinite(herg_cutoff))
      throw ConfigError("affinity cutoffs must be finite");
    if (!(active_cutoff < herg_cutoff))
      throw ConfigError("active_cutoff must be below herg_cutoff");
  }
};

/// Per-target binding free energies in kcal/mol, NaN when unknown.
using AffinityVector = std::array<double, kTargetCount>;

inline AffinityVector missing_affinities() {
  AffinityVector v;
  v.fill(std::numeric_limits<double>::quiet_NaN());
  return v;
}

struct AffinityCheck {
  std::array<Status, kTargetCount> flags{Status::Indeterminate, Status::Indeterminate, Status::Indeterminate,
                                         Status::Indeterminate};
  Status status = Status::Indeterminate;
};

inline AffinityCheck check_affinity(const AffinityVector& dg, const TargetThresholds& th = {}) {
  AffinityCheck out;
  bool any_fail = false, any_missing = false;
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    if (std::isnan(dg[i])) {
      out.flags[i] = Status::Indeterminate;
      any_missing = true;
      continue;
    }
    const bool ok = kTargets[i] == Target::hERG ? dg[i] > th.herg_cutoff : dg[i] < th.active_cutoff;
    out.flags[i] = ok ? Status::Pass : Status::Fail;
    any_fail = any_fail || !ok;
  }
  out.status = any_missing ? Status::Indeterminate : any_fail ? Status::Fail : Status::Pass;
  return out;
}

struct AffinityFilterResult {
  std::vector<std::size_t> passing;
  std::vector<std::size_t> failing;
  std::vector<std::size_t> indeterminate;  // excluded from passing
};

inline AffinityFilterResult affinity_filter(std::span<const AffinityVector> candidates,
                                            const TargetThresholds& th = {}) {
  th.validate();
  AffinityFilterResult r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    switch (check_affinity(candidates[i], th).status) {
      case Status::Pass: r.passing.push_back(i); break;
      case Status::Fail: r.failing.push_back(i); break;
      default: r.indeterminate.push_back(i); break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Property bands
// ---------------------------------------------------------------------------

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;

  static Interval closed(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval above(double lo) { return {lo, std::numeric_limits<double>::infinity(), true, true}; }
  static Interval below(double hi) { return {-std::numeric_limits<double>::infinity(), hi, true, true}; }

  bool contains(double v) const {
    if (std::isnan(v)) return false;
    const bool lo_ok = lo_open ? v > lo : v >= lo;
    const bool hi_ok = hi_open ? v < hi : v <= hi;
    return lo_ok && hi_ok;
  }

  /// True when every point of `inner` lies in this interval.
  bool includes(const Interval& inner) const {
    const bool lo_ok = inner.lo > lo || (inner.lo == lo && (!lo_open || inner.lo_open));
    const bool hi_ok = inner.hi < hi || (inner.hi == hi && (!hi_open || inner.hi_open));
    return lo_ok && hi_ok;
  }

  std::string describe() const {
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) return "any";
    if (lo_inf) return (hi_open ? "< " : "<= ") + csv::format_double(hi);
    if (hi_inf) return (lo_open ? "> " : ">= ") + csv::format_double(lo);
    return std::string(lo_open ? "(" : "[") + csv::format_double(lo) + ", " + csv::format_double(hi) +
           (hi_open ? ")" : "]");
  }
};

enum class PropertySource { Computed, External };

struct PropertyRange {
  std::string name;
  std::optional<Interval> excellent;
  std::optional<Interval> medium;  // includes the excellent band
  PropertySource source = PropertySource::External;

  void validate() const {
    if (!excellent && !medium) throw ConfigError("property range '" + name + "' has no band");
    if (excellent && medium && !medium->includes(*excellent))
      throw ConfigError("property range '" + name + "': excellent band must lie inside the medium band");
  }
};

enum class Band { Excellent, Medium, Fail, Missing };

inline std::string to_string(Band b) {
  switch (b) {
    case Band::Excellent: return "excellent";
    case Band::Medium: return "medium";
    case Band::Fail: return "fail";
    default: return "missing";
  }
}

inline Band classify_property(double value, const PropertyRange& range) {
  if (std::isnan(value)) return Band::Missing;
  if (range.excellent && range.excellent->contains(value)) return Band::Excellent;
  if (range.medium && range.medium->contains(value)) return Band::Medium;
  return Band::Fail;
}

inline constexpr std::size_t kPropertyCount = 10;
inline constexpr std::array<std::string_view, kPropertyCount> kPropertyColumns{
    "caco2", "f20", "pgp_sub", "pgp_inh", "vd", "t_half", "fdamdd", "sas", "logp", "logs"};
inline constexpr std::array<std::string_view, 4> kOptionalPropertyColumns{"logd", "tpsa", "maxring", "nrig"};
inline constexpr std::size_t kLogPIndex = 8;

/// The ten screened rows, in CSV column order.
inline const std::array<PropertyRange, kPropertyCount>& standard_property_ranges() {
  static const std::array<PropertyRange, kPropertyCount> ranges = [] {
    const auto prob_excellent = Interval::closed(0.0, 0.3);
    const auto prob_medium = Interval::closed(0.0, 0.7);
    std::array<PropertyRange, kPropertyCount> r{{
        {"caco2", Interval::above(-5.15), std::nullopt, PropertySource::External},
        {"f20", prob_excellent, prob_medium, PropertySource::External},
        {"pgp_sub", prob_excellent, prob_medium, PropertySource::External},
        {"pgp_inh", prob_excellent, prob_medium, PropertySource::External},
        {"vd", Interval::closed(0.04, 20.0), std::nullopt, PropertySource::External},
        {"t_half", prob_excellent, prob_medium, PropertySource::External},
        {"fdamdd", prob_excellent, prob_medium, PropertySource::External},
        {"sas", Interval::below(6.0), std::nullopt, PropertySource::External},
        {"logp", Interval::closed(0.0, 3.0), std::nullopt, PropertySource::External},
        {"logs", Interval::closed(-4.0, 0.5), std::nullopt, PropertySource::External},
    }};
    for (const auto& x : r) x.validate();
    return r;
  }();
  return ranges;
}

/// Medium or better. Rows without a medium band require excellent.
inline bool at_least_medium(Band b) { return b == Band::Excellent || b == Band::Medium; }

struct PropertyRecord {
  std::array<double, kPropertyCount> values{};
  std::map<std::string, double> extras;
};

using PropertyTable = std::map<std::string, PropertyRecord>;

inline PropertyTable parse_property_table(const csv::Table& t, const std::string& source) {
  const auto& h = t.header;
  if (h.size() < 1 + kPropertyCount || h[0] != "smiles")
    throw DataError(source + ": property header must start with smiles," + "caco2,...,logs");
  for (std::size_t i = 0; i < kPropertyCount; ++i)
    if (h[i + 1] != kPropertyColumns[i])
      throw DataError(source + ": expected column '" + std::string(kPropertyColumns[i]) + "' at position " +
                      std::to_string(i + 2) + ", found '" + h[i + 1] + "'");
  for (std::size_t i = 1 + kPropertyCount; i < h.size(); ++i)
    if (std::find(kOptionalPropertyColumns.begin(), kOptionalPropertyColumns.end(), h[i]) ==
        kOptionalPropertyColumns.end())
      throw DataError(source + ": unexpected property column '" + h[i] + "'");
  PropertyTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string at = csv::where(t, r, source);
    PropertyRecord rec;
    for (std::size_t i = 0; i < kPropertyCount; ++i) rec.values[i] = csv::parse_double(row[i + 1], at);
    for (std::size_t i = 1 + kPropertyCount; i < h.size(); ++i) rec.extras[h[i]] = csv::parse_double(row[i], at);
    if (!out.emplace(row[0], std::move(rec)).second)
      throw DataError(at + ": duplicate smiles '" + row[0] + "'");
  }
  return out;
}

inline PropertyTable read_property_csv(const std::string& path) {
  return parse_property_table(csv::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

struct Candidate {
  std::string smiles;
  AffinityVector dg = missing_affinities();
};

inline std::vector<Candidate> parse_candidates(const csv::Table& t, const std::string& source) {
  const std::vector<std::string> expected{"smiles", "dg_dat", "dg_net", "dg_sert", "dg_herg"};
  if (t.header != expected) throw DataError(source + ": candidate header must be smiles,dg_dat,dg_net,dg_sert,dg_herg");
  std::vector<Candidate> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string at = csv::where(t, r, source);
    Candidate c;
    c.smiles = t.rows[r][0];
    for (std::size_t i = 0; i < kTargetCount; ++i) c.dg[i] = csv::parse_double(t.rows[r][i + 1], at);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<Candidate> read_candidates_csv(const std::string& path) {
  return parse_candidates(csv::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Novelty
// ---------------------------------------------------------------------------

inline constexpr double kNoveltyThreshold = 0.5;

struct NoveltyResult {
  double max_similarity = 0.0;
  std::size_t nearest_reference = 0;
  bool novel = false;
};

inline NoveltyResult novelty(const LatentVector& candidate, std::span<const LatentVector> references,
                             double threshold = kNoveltyThreshold) {
  if (references.empty()) throw DomainError("novelty: no reference vectors");
  NoveltyResult r;
  r.max_similarity = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < references.size(); ++k) {
    const double s = cosine_similarity(candidate, references[k]);
    if (s > r.max_similarity) {
      r.max_similarity = s;
      r.nearest_reference = k;
    }
  }
  r.novel = r.max_similarity < threshold;
  return r;
}

inline constexpr double kReferenceSimilarityGate = 0.40;

/// Mean cosine similarity of a reference to a set of dataset latents.
inline double average_similarity(const LatentVector& reference, std::span<const LatentVector> dataset) {
  if (dataset.empty()) throw DomainError("average_similarity: empty dataset");
  double s = 0.0;
  for (const auto& v : dataset) s += cosine_similarity(reference, v);
  return s / static_cast<double>(dataset.size());
}

inline bool passes_reference_gate(double avg_similarity, double gate = kReferenceSimilarityGate) {
  return avg_similarity > gate;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class Tier { Lead, Candidate, Rejected, Indeterminate };

inline std::string to_string(Tier t) {
  switch (t) {
    case Tier::Lead: return "lead";
    case Tier::Candidate: return "candidate";
    case Tier::Rejected: return "rejected";
    default: return "indeterminate";
  }
}

struct ScreenOptions {
  TargetThresholds thresholds;
  bool require_lipinski = true;
  bool require_properties = true;
  bool require_novelty = true;
  double novelty_threshold = kNoveltyThreshold;
};

struct CandidateVerdict {
  std::size_t index = 0;
  std::string smiles;
  AffinityVector dg = missing_affinities();
  AffinityCheck affinity;
  std::optional<smiles::DescriptorSet> descriptors;  // empty when the SMILES does not parse
  smiles::LipinskiResult lipinski;
  std::array<Band, kPropertyCount> bands{Band::Missing, Band::Missing, Band::Missing, Band::Missing, Band::Missing,
                                         Band::Missing, Band::Missing, Band::Missing, Band::Missing, Band::Missing};
  std::array<double, kPropertyCount> property_values{};
  std::optional<NoveltyResult> novelty;
  Tier tier = Tier::Indeterminate;
  std::vector<std::string> notes;

  double excellent_fraction() const {
    const auto n = std::count(bands.begin(), bands.end(), Band::Excellent);
    return static_cast<double>(n) / static_cast<double>(kPropertyCount);
  }

  /// Mean dG over DAT, NET and SERT.
  double mean_active_dg() const { return (dg[0] + dg[1] + dg[2]) / 3.0; }
};

/// Screens one candidate. `props` and `latent` may be null when unavailable.
inline CandidateVerdict evaluate_candidate(std::size_t index, const std::string& smi, const AffinityVector& dg,
                                           const PropertyRecord* props, const LatentVector* latent,
                                           std::span<const LatentVector> references, const ScreenOptions& opt = {}) {
  CandidateVerdict v;
  v.index = index;
  v.smiles = smi;
  v.dg = dg;
  v.affinity = check_affinity(dg, opt.thresholds);
  v.property_values.fill(std::numeric_limits<double>::quiet_NaN());
  if (props) v.property_values = props->values;
  else v.notes.push_back("no external properties");

  const auto& ranges = standard_property_ranges();
  for (std::size_t i = 0; i < kPropertyCount; ++i) v.bands[i] = classify_property(v.property_values[i], ranges[i]);

  std::optional<double> log_p;
  if (!std::isnan(v.property_values[kLogPIndex])) log_p = v.property_values[kLogPIndex];
  try {
    v.descriptors = smiles::descriptors(smi);
    v.lipinski = smiles::lipinski(*v.descriptors, log_p);
  } catch (const ParseError& e) {
    v.notes.push_back(std::string("unparseable: ") + e.what());
    v.tier = Tier::Rejected;
    return v;
  }

  if (latent && !references.empty()) v.novelty = novelty(*latent, references, opt.novelty_threshold);

  bool rejected = v.affinity.status == Status::Fail;
  bool unknown = v.affinity.status == Status::Indeterminate;
  if (opt.require_lipinski) {
    rejected = rejected || v.lipinski.status == Status::Fail;
    unknown = unknown || v.lipinski.status == Status::Indeterminate;
  }
  if (opt.require_novelty && v.novelty && !v.novelty->novel) rejected = true;

  bool all_medium = true, any_missing = false;
  for (Band b : v.bands) {
    any_missing = any_missing || b == Band::Missing;
    all_medium = all_medium && at_least_medium(b);
  }

  if (!opt.require_properties) all_medium = true;
  if (rejected) v.tier = Tier::Rejected;
  else if (unknown) v.tier = Tier::Indeterminate;
  else if (all_medium) v.tier = Tier::Lead;
  else if (any_missing) v.tier = Tier::Indeterminate;
  else v.tier = Tier::Candidate;
  return v;
}

/// Indices of the lead verdicts in rank order.
inline std::vector<std::size_t> rank_leads(std::span<const CandidateVerdict> verdicts) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < verdicts.size(); ++i)
    if (verdicts[i].tier == Tier::Lead) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& va = verdicts[a];
    const auto& vb = verdicts[b];
    const auto ea = std::count(va.bands.begin(), va.bands.end(), Band::Excellent);
    const auto eb = std::count(vb.bands.begin(), vb.bands.end(), Band::Excellent);
    if (ea != eb) return ea > eb;
    const double ga = va.mean_active_dg(), gb = vb.mean_active_dg();
    if (ga != gb) return ga < gb;
    return va.index < vb.index;
  });
  return idx;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string format_verdict_csv(std::span<const CandidateVerdict> verdicts) {
  std::ostringstream os;
  os << "index,smiles";
  for (auto n : kTargetNames) os << ",dg_" << n;
  os << ",affinity,lipinski";
  for (auto n : kPropertyColumns) os << ',' << n;
  os << ",excellent_fraction,max_similarity,novel,tier\n";
  for (const auto& v : verdicts) {
    os << v.index << ',' << v.smiles;
    for (double g : v.dg) os << ',' << csv::format_double(g);
    os << ',' << to_string(v.affinity.status) << ',' << (v.descriptors ? to_string(v.lipinski.status) : "fail");
    for (Band b : v.bands) os << ',' << to_string(b);
    os << ',' << csv::format_double(v.excellent_fraction());
    if (v.novelty) os << ',' << csv::format_double(v.novelty->max_similarity) << ',' << (v.novelty->novel ? 1 : 0);
    else os << ",,";
    os << ',' << to_string(v.tier) << '\n';
  }
  return os.str();
}

namespace detail {
inline nlohmann::ordered_json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}
}  // namespace detail

inline nlohmann::ordered_json verdict_to_json(const CandidateVerdict& v) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["index"] = v.index;
  j["smiles"] = v.smiles;
  ordered_json dg = ordered_json::object(), flags = ordered_json::object();
  for (std::size_t i = 0; i < kTargetCount; ++i) {
    dg[std::string(kTargetNames[i])] = detail::number_or_null(v.dg[i]);
    flags[std::string(kTargetNames[i])] = to_string(v.affinity.flags[i]);
  }
  j["delta_g"] = dg;
  j["affinity_flags"] = flags;
  j["affinity"] = to_string(v.affinity.status);
  if (v.descriptors) {
    const auto& d = *v.descriptors;
    j["descriptors"] = {{"mw", d.mw},         {"n_ha", d.n_ha},     {"n_hd", d.n_hd},    {"n_het", d.n_het},
                        {"f_char", d.f_char}, {"n_ring", d.n_ring}, {"n_rot", d.n_rot}};
    const auto& l = v.lipinski;
    ordered_json lj;
    lj["mw"] = l.mw_ok;
    lj["log_p"] = l.log_p_ok ? ordered_json(*l.log_p_ok) : ordered_json(nullptr);
    lj["n_hd"] = l.hd_ok;
    lj["n_ha"] = l.ha_ok;
    lj["status"] = to_string(l.status);
    j["lipinski"] = lj;
  } else {
    j["descriptors"] = nullptr;
    j["lipinski"] = nullptr;
  }
  ordered_json props = ordered_json::object();
  for (std::size_t i = 0; i < kPropertyCount; ++i) {
    props[std::string(kPropertyColumns[i])] = {{"value", detail::number_or_null(v.property_values[i])},
                                               {"band", to_string(v.bands[i])}};
  }
  j["properties"] = props;
  j["excellent_fraction"] = v.excellent_fraction();
  if (v.novelty) {
    j["novelty"] = {{"max_similarity", v.novelty->max_similarity},
                    {"nearest_reference", v.novelty->nearest_reference},
                    {"novel", v.novelty->novel}};
  } else {
    j["novelty"] = nullptr;
  }
  j["tier"] = to_string(v.tier);
  j["notes"] = v.notes;
  return j;
}

inline nlohmann::ordered_json ranges_to_json() {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : standard_property_ranges()) {
    out.push_back({{"name", r.name},
                   {"excellent", r.excellent ? r.excellent->describe() : "none"},
                   {"medium", r.medium ? r.medium->describe() : "none"}});
  }
  return out;
}

}  // namespace latentgen::screen
