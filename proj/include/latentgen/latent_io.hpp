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

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "latentgen/core.hpp"
#include "latentgen/csv.hpp"

namespace latentgen {

/// Rows of `id,v0,...,v{D-1}`; ids kept in file order.
struct LatentTable {
  std::vector<std::string> ids;
  std::vector<LatentVector> vectors;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t dim() const noexcept { return vectors.empty() ? 0 : vectors.front().dim(); }
};

inline std::string format_latent_csv(const std::vector<std::string>& ids, const std::vector<LatentVector>& vectors) {
  require_same_dim(ids.size(), vectors.size(), "format_latent_csv");
  const std::size_t d = vectors.empty() ? 0 : vectors.front().dim();
  std::ostringstream out;
  out << "id";
  for (std::size_t j = 0; j < d; ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    require_same_dim(vectors[i].dim(), d, "format_latent_csv");
    out << ids[i];
    for (double v : vectors[i]) out << ',' << csv::format_double(v);
    out << '\n';
  }
  return out.str();
}

inline LatentTable parse_latent_table(const csv::Table& t, const std::string& source) {
  if (t.header.empty() || t.header[0] != "id") throw DataError(source + ": latent CSV must start with column 'id'");
  const std::size_t d = t.header.size() - 1;
  if (d == 0) throw DataError(source + ": latent CSV has no vector columns");
  for (std::size_t j = 0; j < d; ++j) {
    if (t.header[j + 1] != "v" + std::to_string(j)) {
      throw DataError(source + ": expected column v" + std::to_string(j) + ", found '" + t.header[j + 1] + "'");
    }
  }
  LatentTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto w = csv::where(t, r, source);
    std::vector<double> values(d);
    for (std::size_t j = 0; j < d; ++j) values[j] = csv::parse_double(t.rows[r][j + 1], w);
    LatentVector v(std::move(values));
    if (!v.all_finite()) throw DataError(w + ": non-finite latent entry");
    table.ids.push_back(t.rows[r][0]);
    table.vectors.push_back(std::move(v));
  }
  return table;
}

inline LatentTable read_latent_csv(const std::string& path) {
  return parse_latent_table(csv::read_file(path), path);
}

/// Sidecar `id,smiles` mapping.
inline std::map<std::string, std::string> read_id_smiles_csv(const std::string& path) {
  const auto t = csv::read_file(path);
  const auto id_col = t.column("id");
  const auto smi_col = t.column("smiles");
  if (id_col < 0 || smi_col < 0) throw DataError(path + ": expected header id,smiles");
  std::map<std::string, std::string> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& id = t.rows[r][static_cast<std::size_t>(id_col)];
    if (!out.emplace(id, t.rows[r][static_cast<std::size_t>(smi_col)]).second) {
      throw DataError(csv::where(t, r, path) + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

inline std::string format_id_smiles_csv(const std::vector<std::string>& ids, const std::vector<std::string>& smiles) {
  require_same_dim(ids.size(), smiles.size(), "format_id_smiles_csv");
  std::ostringstream out;
  out << "id,smiles\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << smiles[i] << '\n';
  return out.str();
}

}  // namespace latentgen
