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
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxo/taxonomy.hpp"

namespace taxo {

// A concept placed into a taxonomy by completion or expansion.
struct Insertion {
  ConceptId id;
  TokenSeq name;
  CandidatePosition position;
  double p_valid = 0.0;

  friend bool operator==(const Insertion&, const Insertion&) = default;
};

struct MetricsCounts {
  std::size_t inserted = 0;
  std::size_t correct = 0;
  std::size_t total_test = 0;
  std::size_t uni_total = 0;
  std::size_t multi_total = 0;
  std::size_t uni_correct = 0;
  std::size_t multi_correct = 0;

  friend bool operator==(const MetricsCounts&, const MetricsCounts&) = default;
};

// Undefined ratios (0/0) are left empty rather than reported as zero, with
// the exception of precision, which is 0 when nothing was inserted.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> acc;
  std::optional<double> acc_uni;
  std::optional<double> acc_multi;
  MetricsCounts counts;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

double f1_score(double precision, double recall);

// An insertion is correct when its name equals a test concept's name and
// its parents and children are subsets of that concept's gold parents and
// children. `correct` counts distinct test concepts so matched.
MetricsReport score_completion(std::span<const Insertion> predictions, const Taxonomy& gold,
                               const std::set<ConceptId>& test_ids);

struct GenerationScore {
  std::optional<double> acc;
  std::optional<double> acc_uni;
  std::optional<double> acc_multi;
  std::size_t total = 0, correct = 0;
  std::size_t uni_total = 0, uni_correct = 0;
  std::size_t multi_total = 0, multi_correct = 0;
};

// (generated, gold) pairs; exact match after normalization. Uni / multi is
// decided by the gold token count.
GenerationScore score_generation(std::span<const std::pair<TokenSeq, TokenSeq>> pairs);

// Probability that a positive outscores a negative, ties counting one half.
// Throws ShapeError when either side is empty.
double roc_auc(std::span<const double> positive, std::span<const double> negative);

// Copies the accuracy fields into `report`.
void merge_generation(MetricsReport& report, const GenerationScore& g);

// Aligned human-readable table followed by a blank line and one
// key<TAB>value line per field. Absent values are written as "absent".
void write_metrics(std::ostream& out, const MetricsReport& m);
// Reads the key<TAB>value block back, skipping any other lines.
MetricsReport parse_metrics(std::istream& in);

}  // namespace taxo
