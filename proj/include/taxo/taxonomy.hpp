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
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace taxo {

using ConceptId = std::string;
using TokenSeq = std::vector<std::string>;

inline constexpr std::size_t kUnboundedHops = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultMaxNameLen = 12;

struct Concept {
  ConceptId id;
  TokenSeq name;

  friend bool operator==(const Concept&, const Concept&) = default;
};

struct Edge {
  ConceptId parent;
  ConceptId child;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Lowercases and splits on whitespace.
TokenSeq tokenize_name(std::string_view text);
// Lowercase + single-space join; the canonical form used for name matching.
std::string normalize_name(const TokenSeq& tokens);
std::string join_tokens(const TokenSeq& tokens);

// An is-a hierarchy: a DAG of named concepts. Values are immutable once
// constructed; mutating operations return a new Taxonomy.
class Taxonomy {
 public:
  Taxonomy() = default;

  // Validates ids, edge endpoints and acyclicity. Names are lowercased.
  Taxonomy(std::vector<Concept> concepts, const std::vector<Edge>& edges,
           std::size_t max_name_len = kDefaultMaxNameLen);

  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;
  bool contains(const ConceptId& id) const { return nodes_.contains(id); }

  const Concept& concept_of(const ConceptId& id) const;
  const TokenSeq& name(const ConceptId& id) const { return concept_of(id).name; }
  const std::set<ConceptId>& parents(const ConceptId& id) const;
  const std::set<ConceptId>& children(const ConceptId& id) const;

  // Sorted by id.
  std::vector<ConceptId> ids() const;
  std::vector<Concept> concepts() const;
  std::vector<Edge> edges() const;
  std::vector<ConceptId> roots() const;
  bool is_root(const ConceptId& id) const { return parents(id).empty(); }

  // Longest root-to-leaf path counted in nodes; 0 for an empty taxonomy.
  std::size_t depth() const;

  // Lowest id whose normalized name equals `normalized`, if any.
  std::optional<ConceptId> find_by_name(const std::string& normalized) const;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.concepts() == b.concepts() && a.edges() == b.edges();
  }

 private:
  struct Node {
    Concept info;
    std::set<ConceptId> parents;
    std::set<ConceptId> children;
  };
  const Node& node(const ConceptId& id) const;

  std::map<ConceptId, Node> nodes_;
  std::multimap<std::string, ConceptId> by_name_;
};

enum class PositionLabel { kValid, kInvalid, kUnknown };

// A placeholder (parents, children) for a new or masked concept. `masked`
// names the existing concept that occupies the position when it was produced
// by masking; context construction then treats that concept as absent.
struct CandidatePosition {
  std::set<ConceptId> parents;
  std::set<ConceptId> children;
  PositionLabel label = PositionLabel::kUnknown;
  std::optional<ConceptId> masked;

  friend bool operator==(const CandidatePosition&, const CandidatePosition&) = default;
};

// The position occupied by an existing non-root concept.
CandidatePosition mask_position(const Taxonomy& t, const ConceptId& v);

// Throws InvalidPosition unless parents is nonempty, all ids exist, and
// every child is a descendant of every parent.
void validate_position(const Taxonomy& t, const CandidatePosition& pos);

std::set<ConceptId> ancestors(const Taxonomy& t, const ConceptId& v,
                              std::size_t max_hops = kUnboundedHops);
std::set<ConceptId> descendants(const Taxonomy& t, const ConceptId& v,
                                std::size_t max_hops = kUnboundedHops);
std::set<ConceptId> siblings(const Taxonomy& t, const ConceptId& v);

// Adds <p,v> for every parent and <v,c> for every child, and removes the
// direct shortcuts <p,c> the new concept now bridges.
Taxonomy insert_concept(const Taxonomy& t, const Concept& v, const CandidatePosition& pos);

// Removes v, reconnecting each of its parents to each of its children.
Taxonomy remove_concept(const Taxonomy& t, const ConceptId& v);

// Induced sub-taxonomy on `keep`; every kept concept is linked to its nearest
// kept ancestors so that hierarchy survives through removed nodes.
Taxonomy restrict_taxonomy(const Taxonomy& t, const std::set<ConceptId>& keep);

struct Split {
  std::vector<ConceptId> train;
  std::vector<ConceptId> validation;
  std::vector<ConceptId> test;
};

// 3:1:1 split. Validation and test are drawn uniformly from non-root
// concepts; train holds the remainder, including every root.
Split split_taxonomy(const Taxonomy& t, std::uint64_t seed);

// Concepts TSV: id<TAB>name tokens; edges TSV: parent<TAB>child.
// Blank lines and '#' comments are ignored.
Taxonomy load_taxonomy(const std::filesystem::path& concepts_path,
                       const std::filesystem::path& edges_path,
                       std::size_t max_name_len = kDefaultMaxNameLen);
void save_taxonomy(const Taxonomy& t, const std::filesystem::path& concepts_path,
                   const std::filesystem::path& edges_path);

std::vector<Concept> load_concepts(const std::filesystem::path& path,
                                   std::size_t max_name_len = kDefaultMaxNameLen);

}  // namespace taxo
