// Copyright 2026 The Taxocomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "taxo/metrics.hpp"

namespace taxo {

struct IterationStats {
  std::size_t new_concepts = 0;   // |C_i|
  std::size_t taxonomy_size = 0;  // |V_i|

  friend bool operator==(const IterationStats&, const IterationStats&) = default;
};

struct CompletionReport {
  std::vector<Insertion> insertions;
  // Generated names that repeated an earlier insertion of the same run.
  std::vector<Insertion> duplicates;
  std::vector<IterationStats> iterations;
  std::size_t positions_scored = 0;
  std::size_t positions_skipped = 0;  // no relational context
  std::optional<MetricsReport> metrics;

  friend bool operator==(const CompletionReport&, const CompletionReport&) = default;
};

// Line-delimited, tab-separated records:
//   insertion  id  name  parents  children  p_valid
//   duplicate  id  name  parents  children  p_valid
//   iteration  index  new_concepts  taxonomy_size
//   positions  scored  skipped
//   metric     key  value
// Id lists are comma-separated, "-" when empty.
void write_report(std::ostream& out, const CompletionReport& r);
CompletionReport read_report(std::istream& in);
void save_report(const CompletionReport& r, const std::filesystem::path& path);
CompletionReport load_report(const std::filesystem::path& path);

}  // namespace taxo
