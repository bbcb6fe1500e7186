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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taxo/rng.hpp"
#include "taxo/taxonomy.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

enum class RelationKind { kParent, kChild, kSibling };

// Which relations become sentences. Hop counts > 1 extend the parent
// (child) group to ancestors (descendants) rendered with the same template.
struct RelationSet {
  bool parents = true;
  bool children = true;
  bool siblings = true;
  std::size_t ancestor_hops = 1;
  std::size_t descendant_hops = 1;

  // Comma list of parent|child|sibling|ancestor:N|descendant:N.
  static RelationSet parse(const std::string& spec);
  std::string to_string() const;

  friend bool operator==(const RelationSet&, const RelationSet&) = default;
};

// tokens(u) ++ template(kind) ++ [MASK]
struct RelationSentence {
  std::vector<TokenId> tokens;
  RelationKind kind = RelationKind::kParent;
  ConceptId source;
};

const TokenSeq& relation_template(RelationKind kind);

// Local node 0 is the anchor (the position itself); node i > 0 is
// nodes[i - 1]. Edges are (parent, child) pairs of local indices.
struct Subgraph {
  static constexpr std::size_t kAnchor = 0;

  std::vector<ConceptId> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t node_count() const { return nodes.size() + 1; }
};

struct SubgraphPair {
  Subgraph down;  // anchor plus ancestors, edges parent -> child
  Subgraph up;    // anchor plus descendants
};

struct TrainingExample {
  CandidatePosition position;
  std::vector<RelationSentence> sentences;
  SubgraphPair subgraphs;
  std::optional<TokenSeq> target_name;
  int validity_label = 0;
};

// The position's parents plus their ancestors, up to `hops` hops from the
// position. The masked concept (if any) is never included.
std::set<ConceptId> position_ancestors(const Taxonomy& t, const CandidatePosition& pos,
                                       std::size_t hops);
std::set<ConceptId> position_descendants(const Taxonomy& t, const CandidatePosition& pos,
                                         std::size_t hops);
// Other children of the position's parents.
std::set<ConceptId> position_siblings(const Taxonomy& t, const CandidatePosition& pos);

// Parents, then children, then siblings; each group sorted by id.
// Throws NoContext when no relation applies.
std::vector<RelationSentence> build_sentences(const Taxonomy& t, const CandidatePosition& pos,
                                              const RelationSet& relations,
                                              const TokenVocabulary& vocab);

SubgraphPair build_subgraphs(const Taxonomy& t, const CandidatePosition& pos, std::size_t k_hops);

struct NegativeSamples {
  std::vector<CandidatePosition> positions;
  // Set when a draw was requested but no concept was eligible.
  bool starved = false;
};

// floor(r_neg) + Bernoulli(frac(r_neg)) invalid positions, each replacing one
// uniformly chosen parent or child with a uniform draw from
// V \ (ancestors ∪ descendants ∪ {masked}).
NegativeSamples sample_negatives(const Taxonomy& t, const CandidatePosition& pos, double r_neg,
                                 Rng& rng);

// All ({p}, {c}) with c a descendant of p within k_hops, and all leaf
// positions ({p}, {}); ordered by parent, leaf position first.
std::vector<CandidatePosition> enumerate_candidate_positions(const Taxonomy& t,
                                                             std::size_t k_hops);

TrainingExample make_example(const Taxonomy& t, const CandidatePosition& pos,
                             const RelationSet& relations, std::size_t k_hops,
                             const TokenVocabulary& vocab, std::optional<TokenSeq> target);

}  // namespace taxo
