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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "taxo/context.hpp"
#include "taxo/corpus.hpp"
#include "taxo/mct.hpp"
#include "taxo/model.hpp"
#include "taxo/optimizer.hpp"
#include "taxo/report.hpp"

namespace taxo {

struct RunConfig {
  double lambda = 2.0;
  double r_neg = 0.15;
  double tau = 0.8;
  std::size_t max_iter = 2;
  std::size_t k_hops = 2;
  RelationSet relations;
  std::uint64_t seed = 0;
  std::size_t batch_size = 8;
  // Masked-token pre-training epochs run before training when a corpus is
  // given; 0 skips pre-training.
  std::size_t pretrain_epochs = 0;
  OptimizerConfig optimizer;
  // Architecture; vocab_size and node_count are filled in by train().
  ModelConfig model;
  // OpenMP across batch shards and positions. Results do not depend on it.
  bool parallel = true;

  // Throws ConfigError on out-of-range values.
  void validate() const;
  KeyValues to_key_values() const;
  static RunConfig from_key_values(const KeyValues& kv);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);

// A trained model with the lookup tables it was trained against.
struct ModelState {
  TokenVocabulary vocab;
  NodeIndex nodes;
  Model<float> model;
};

struct EpochStats {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  LossBundle train;  // summed over the epoch, training mode
  std::optional<LossBundle> validation;
  std::size_t negatives = 0;
};

struct TrainOptions {
  // Vocabulary to train against; defaults to build_vocabulary(taxonomy).
  // Must be the corpus vocabulary when a corpus is given.
  const TokenVocabulary* vocab = nullptr;
  // Concepts given a node embedding; defaults to the training taxonomy.
  std::vector<ConceptId> node_ids;
  // Masked for validation inside `validation_taxonomy`; the best epoch by
  // validation joint loss is kept. Without them the last epoch is kept.
  const Taxonomy* validation_taxonomy = nullptr;
  std::vector<ConceptId> validation_ids;
  std::function<void(const EpochStats&, const Model<float>&)> on_epoch;
  // Embeddings and sentence encoder copied in before training. Its
  // vocabulary is used when `vocab` is unset and must equal it otherwise.
  // Takes precedence over corpus pre-training.
  const ModelState* pretrained = nullptr;
  // Checked after each epoch; training ends once it returns true.
  std::function<bool(const EpochStats&, const Model<float>&)> stop;
};

struct TrainResult {
  ModelState state;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  std::size_t skipped = 0;           // concepts without relational context
  std::size_t starved_negatives = 0; // positives with no eligible substitute
  std::optional<PretrainStats> pretraining;
};

// Every non-root concept of `t_train` is masked once per epoch (in a
// seeded order) to form a valid position; negatives are drawn at r_neg.
TrainResult train(const Taxonomy& t_train, const CorpusStore* corpus, const RunConfig& cfg,
                  const TrainOptions& opts = {});

// Encoded positive example for a concept of `t`, masked in place.
std::optional<EncodedExample> masked_example(const Taxonomy& t, const ConceptId& v,
                                             const ModelState& state, const RunConfig& cfg);

struct ScoredPosition {
  CandidatePosition position;
  double p_valid = 0.0;
  std::optional<TokenSeq> name;  // generated when p_valid >= tau
};

// Scores every enumerated position of `t`; positions without relational
// context are dropped and counted in `skipped`. The parallel and serial
// paths return identical results.
std::vector<ScoredPosition> score_positions(const Taxonomy& t, const ModelState& state,
                                            const RunConfig& cfg, double tau,
                                            std::size_t* skipped = nullptr);

struct Completion {
  CompletionReport report;
  Taxonomy taxonomy;
};

// Inserts generated names at positions scoring p_valid >= tau, highest
// first. Names already in `t`, names holding [UNK], and empty names are
// skipped; a name generated again at a later position is reported as a
// duplicate.
Completion complete(const Taxonomy& t, const ModelState& state, const RunConfig& cfg);

// Greedy name for a masked concept, and the (generated, gold) pairs over a
// set of concepts.
TokenSeq generate_for(const Taxonomy& t, const ConceptId& v, const ModelState& state,
                      const RunConfig& cfg);
std::vector<std::pair<TokenSeq, TokenSeq>> generation_pairs(const Taxonomy& t,
                                                            const std::vector<ConceptId>& ids,
                                                            const ModelState& state,
                                                            const RunConfig& cfg);

// Raw graph returned by an extraction method; checked before use.
struct TaxonomyDraft {
  std::vector<Concept> concepts;
  std::vector<Edge> edges;
  // Optional p_valid of each added concept's position, by id.
  std::map<ConceptId, double> scores;
};

class ExtractionMethod {
 public:
  virtual ~ExtractionMethod() = default;
  virtual std::string name() const = 0;
  // Must return `t` plus any subset of `concepts`, acyclic.
  virtual TaxonomyDraft attach(const Taxonomy& t, const std::vector<Concept>& concepts) = 0;
};

// For each concept (by id), scores every position of the current taxonomy
// and attaches at the lowest teacher-forced name loss among positions with
// p_valid >= min_p_valid; concepts with no such position are skipped.
Taxonomy builtin_classifier_attach(const Taxonomy& t, const std::vector<Concept>& concepts,
                                   const ModelState& state, const RunConfig& cfg,
                                   double min_p_valid = 0.5,
                                   std::map<ConceptId, double>* scores = nullptr);

class ClassifierAttach : public ExtractionMethod {
 public:
  ClassifierAttach(const ModelState& state, const RunConfig& cfg, double min_p_valid = 0.5)
      : state_(state), cfg_(cfg), min_p_valid_(min_p_valid) {}
  std::string name() const override { return "classifier-attach"; }
  TaxonomyDraft attach(const Taxonomy& t, const std::vector<Concept>& concepts) override;

 private:
  const ModelState& state_;
  RunConfig cfg_;
  double min_p_valid_;
};

// (previous ∪ generated) minus names already in the taxonomy, keyed by
// normalized name; the first concept seen for a name is kept.
std::vector<Concept> expand_new_concepts(const std::vector<Concept>& previous,
                                         const std::vector<Concept>& generated,
                                         const std::set<std::string>& existing_names);

struct Expansion {
  CompletionReport report;
  Taxonomy taxonomy;
  std::vector<Taxonomy> history;  // T_0 .. T_final
  std::size_t extraction_calls = 0;
};

// Alternates generation (names with p_valid >= tau) and extraction until
// no new concept remains or max_iter iterations ran. Throws
// ExtractionContractViolation when the method returns a cyclic graph,
// drops existing concepts, or adds concepts it was not given.
Expansion gentaxo_plus_plus(const Taxonomy& t0, const std::vector<Concept>& c0,
                            const ModelState& state, ExtractionMethod& extraction,
                            const RunConfig& cfg);

}  // namespace taxo
