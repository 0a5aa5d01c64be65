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

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "latentgen/csv.hpp"
#include "latentgen/smiles.hpp"

namespace testing_support {

/// A fresh directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::path(LATENTGEN_TEST_TMP) / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    latentgen::csv::write_file(file(name), text);
    return file(name);
  }

 private:
  std::filesystem::path path_;
};

/// `n` distinct parseable SMILES of at most `max_len` characters, grown from a
/// small fragment grammar. Deterministic in `seed`.
inline std::vector<std::string> toy_corpus(std::size_t n, std::uint64_t seed, std::size_t max_len = 24) {
  static const std::vector<std::string> chain{"C", "CC", "N", "O", "C(C)", "C(=O)", "C(O)", "CN"};
  static const std::vector<std::string> cap{"F", "Cl", "c1ccccc1", "C#N", "O", "N", "C"};
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> out;
  std::size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > 1000000) throw std::runtime_error("toy_corpus: grammar exhausted");
    std::string s = "C";
    const std::size_t pieces = 1 + rng() % 6;
    for (std::size_t i = 0; i < pieces; ++i) s += chain[rng() % chain.size()];
    s += cap[rng() % cap.size()];
    if (s.size() > max_len || !latentgen::smiles::is_parseable(s) || !seen.insert(s).second) continue;
    out.push_back(s);
  }
  return out;
}

}  // namespace testing_support
