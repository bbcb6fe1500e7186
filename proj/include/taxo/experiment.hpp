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
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <utility>
#include <vector>

#include "taxo/metrics.hpp"
#include "taxo/pipeline.hpp"

namespace taxo {

// The training taxonomy of a split: train concepts only, hierarchy kept
// through removed nodes.
Taxonomy train_view(const Taxonomy& t, const Split& split);

// Greedy name for each held-out concept, masked in `t` restricted to
// `known` plus that concept alone. Pairs are (generated, gold).
std::vector<std::pair<TokenSeq, TokenSeq>> held_out_generation_pairs(const Taxonomy& t,
                                                                     const std::set<ConceptId>& known,
                                                                     const std::vector<ConceptId>& ids,
                                                                     const ModelState& state,
                                                                     const RunConfig& cfg);

// p_valid of each held-out concept's gold position and of `negatives_per`
// corrupted copies of it, in the same restricted view. Concepts without
// relational context are skipped.
struct PositionScores {
  std::vector<double> positive;
  std::vector<double> negative;
};
PositionScores held_out_position_scores(const Taxonomy& t, const std::set<ConceptId>& known,
                                        const std::vector<ConceptId>& ids, const ModelState& state,
                                        const RunConfig& cfg, double negatives_per, std::uint64_t seed);

struct HeldOutResult {
  TrainResult trained;
  Completion completion;  // completion of the training taxonomy
  MetricsReport metrics;  // insertions and generated names scored against the test split
};

// Trains on the train split with the validation split choosing the epoch,
// completes the training taxonomy and scores it against the test split.
// `opts` may carry a vocabulary, a pretrained state or callbacks; its
// validation fields are overwritten.
HeldOutResult run_held_out(const Taxonomy& t, const Split& split, const RunConfig& cfg,
                           const CorpusStore* corpus = nullptr, TrainOptions opts = {});

// Each axis left empty takes the base configuration's value.
struct AblationGrid {
  std::vector<FusionStrategy> fusion;
  std::vector<std::size_t> k_hops;
  std::vector<RelationSet> relations;
  std::vector<double> r_neg;
};

struct AblationRow {
  RunConfig config;
  MetricsReport metrics;
};

// Every combination of the grid, in axis order fusion, k_hops, relations,
// r_neg, each run through run_held_out.
std::vector<AblationRow> run_ablation(const Taxonomy& t, const Split& split, const RunConfig& base,
                                      const AblationGrid& grid, const CorpusStore* corpus = nullptr,
                                      const TokenVocabulary* vocab = nullptr,
                                      const std::function<void(const AblationRow&)>& on_row = {});

// Aligned comparison table, one row per configuration, percentages with
// two decimals and "-" for absent values.
void write_ablation_table(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace taxo
