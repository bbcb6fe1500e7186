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

#include "taxo/context.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "taxo/errors.hpp"

namespace taxo {

RelationSet RelationSet::parse(const std::string& spec) {
  RelationSet r{false, false, false, 1, 1};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const std::string key = item.substr(0, colon);
    std::size_t hops = 1;
    if (colon != std::string::npos) {
      try {
        hops = std::stoul(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError("bad hop count in relation '" + item + "'");
      }
      if (hops == 0) throw ConfigError("hop count must be >= 1 in '" + item + "'");
    }
    if (key == "parent") {
      r.parents = true;
    } else if (key == "child") {
      r.children = true;
    } else if (key == "sibling") {
      r.siblings = true;
    } else if (key == "ancestor") {
      r.parents = true;
      r.ancestor_hops = hops;
    } else if (key == "descendant") {
      r.children = true;
      r.descendant_hops = hops;
    } else {
      throw ConfigError("unknown relation '" + item + "'");
    }
  }
  if (!r.parents && !r.children && !r.siblings) throw ConfigError("empty relation set");
  return r;
}

std::string RelationSet::to_string() const {
  std::vector<std::string> parts;
  if (parents) parts.push_back(ancestor_hops > 1 ? "ancestor:" + std::to_string(ancestor_hops) : "parent");
  if (children) {
    parts.push_back(descendant_hops > 1 ? "descendant:" + std::to_string(descendant_hops) : "child");
  }
  if (siblings) parts.push_back("sibling");
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

const TokenSeq& relation_template(RelationKind kind) {
  static const TokenSeq kParent{"is", "a", "class", "of"};
  static const TokenSeq kChild{"is", "a", "subclass", "of"};
  static const TokenSeq kSibling{"is", "a", "sibling", "of"};
  switch (kind) {
    case RelationKind::kParent: return kParent;
    case RelationKind::kChild: return kChild;
    case RelationKind::kSibling: return kSibling;
  }
  return kParent;
}

std::set<ConceptId> position_ancestors(const Taxonomy& t, const CandidatePosition& pos,
                                       std::size_t hops) {
  std::set<ConceptId> out;
  if (hops == 0) return out;
  for (const auto& p : pos.parents) {
    out.insert(p);
    if (hops > 1) out.merge(ancestors(t, p, hops - 1));
  }
  if (pos.masked) out.erase(*pos.masked);
  return out;
}

std::set<ConceptId> position_descendants(const Taxonomy& t, const CandidatePosition& pos,
                                         std::size_t hops) {
  std::set<ConceptId> out;
  if (hops == 0) return out;
  for (const auto& c : pos.children) {
    out.insert(c);
    if (hops > 1) out.merge(descendants(t, c, hops - 1));
  }
  if (pos.masked) out.erase(*pos.masked);
  return out;
}

std::set<ConceptId> position_siblings(const Taxonomy& t, const CandidatePosition& pos) {
  std::set<ConceptId> out;
  for (const auto& p : pos.parents) {
    for (const auto& c : t.children(p)) {
      if (!pos.children.contains(c) && !pos.parents.contains(c)) out.insert(c);
    }
  }
  if (pos.masked) out.erase(*pos.masked);
  return out;
}

namespace {

RelationSentence render(const Taxonomy& t, const ConceptId& u, RelationKind kind,
                        const TokenVocabulary& vocab) {
  RelationSentence s;
  s.kind = kind;
  s.source = u;
  s.tokens = vocab.encode(t.name(u));
  for (const auto& tok : relation_template(kind)) s.tokens.push_back(vocab.id(tok));
  s.tokens.push_back(kMaskToken);
  return s;
}

}  // namespace

std::vector<RelationSentence> build_sentences(const Taxonomy& t, const CandidatePosition& pos,
                                              const RelationSet& relations,
                                              const TokenVocabulary& vocab) {
  std::vector<RelationSentence> out;
  if (relations.parents) {
    for (const auto& u : position_ancestors(t, pos, relations.ancestor_hops)) {
      out.push_back(render(t, u, RelationKind::kParent, vocab));
    }
  }
  if (relations.children) {
    for (const auto& u : position_descendants(t, pos, relations.descendant_hops)) {
      out.push_back(render(t, u, RelationKind::kChild, vocab));
    }
  }
  if (relations.siblings) {
    for (const auto& u : position_siblings(t, pos)) {
      out.push_back(render(t, u, RelationKind::kSibling, vocab));
    }
  }
  if (out.empty()) throw NoContext("position has no relational context");
  return out;
}

namespace {

// Induced subgraph on `members` plus the anchor, which is attached to
// `anchor_links` either as their child (down) or their parent (up).
Subgraph induced(const Taxonomy& t, const std::set<ConceptId>& members,
                 const std::set<ConceptId>& anchor_links, bool anchor_is_child) {
  Subgraph g;
  g.nodes.assign(members.begin(), members.end());
  std::map<ConceptId, std::size_t> local;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) local[g.nodes[i]] = i + 1;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (const auto& c : t.children(g.nodes[i])) {
      if (auto it = local.find(c); it != local.end()) g.edges.emplace_back(i + 1, it->second);
    }
  }
  for (const auto& a : anchor_links) {
    auto it = local.find(a);
    if (it == local.end()) continue;
    if (anchor_is_child) {
      g.edges.emplace_back(it->second, Subgraph::kAnchor);
    } else {
      g.edges.emplace_back(Subgraph::kAnchor, it->second);
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace

SubgraphPair build_subgraphs(const Taxonomy& t, const CandidatePosition& pos, std::size_t k_hops) {
  if (k_hops == 0) throw ConfigError("k_hops must be >= 1");
  SubgraphPair pair;
  pair.down = induced(t, position_ancestors(t, pos, k_hops), pos.parents, true);
  pair.up = induced(t, position_descendants(t, pos, k_hops), pos.children, false);
  return pair;
}

NegativeSamples sample_negatives(const Taxonomy& t, const CandidatePosition& pos, double r_neg,
                                 Rng& rng) {
  if (!(r_neg >= 0.0)) throw ConfigError("r_neg must be >= 0");
  NegativeSamples out;
  const double whole = std::floor(r_neg);
  std::size_t n = static_cast<std::size_t>(whole);
  if (rng.bernoulli(r_neg - whole)) ++n;
  if (n == 0) return out;

  std::set<ConceptId> related = position_ancestors(t, pos, kUnboundedHops);
  related.merge(position_descendants(t, pos, kUnboundedHops));
  related.insert(pos.parents.begin(), pos.parents.end());
  related.insert(pos.children.begin(), pos.children.end());
  if (pos.masked) related.insert(*pos.masked);
  std::vector<ConceptId> pool;
  for (const auto& id : t.ids()) {
    if (!related.contains(id)) pool.push_back(id);
  }
  std::vector<std::pair<bool, ConceptId>> members;  // (is_parent, id)
  for (const auto& p : pos.parents) members.emplace_back(true, p);
  for (const auto& c : pos.children) members.emplace_back(false, c);
  if (pool.empty() || members.empty()) {
    out.starved = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [is_parent, victim] = members[rng.below(members.size())];
    const ConceptId& replacement = pool[rng.below(pool.size())];
    CandidatePosition neg = pos;
    neg.label = PositionLabel::kInvalid;
    auto& side = is_parent ? neg.parents : neg.children;
    side.erase(victim);
    side.insert(replacement);
    out.positions.push_back(std::move(neg));
  }
  return out;
}

std::vector<CandidatePosition> enumerate_candidate_positions(const Taxonomy& t,
                                                             std::size_t k_hops) {
  if (k_hops == 0) throw ConfigError("k_hops must be >= 1");
  std::vector<CandidatePosition> out;
  for (const auto& p : t.ids()) {
    CandidatePosition leaf;
    leaf.parents = {p};
    out.push_back(leaf);
    for (const auto& c : descendants(t, p, k_hops)) {
      CandidatePosition pair;
      pair.parents = {p};
      pair.children = {c};
      out.push_back(std::move(pair));
    }
  }
  return out;
}

TrainingExample make_example(const Taxonomy& t, const CandidatePosition& pos,
                             const RelationSet& relations, std::size_t k_hops,
                             const TokenVocabulary& vocab, std::optional<TokenSeq> target) {
  TrainingExample ex;
  ex.position = pos;
  ex.sentences = build_sentences(t, pos, relations, vocab);
  ex.subgraphs = build_subgraphs(t, pos, k_hops);
  ex.validity_label = target.has_value() ? 1 : 0;
  ex.target_name = std::move(target);
  return ex;
}

}  // namespace taxo
