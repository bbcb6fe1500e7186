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

#include "taxo/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "taxo/errors.hpp"
#include "taxo/rng.hpp"

namespace taxo {

TokenSeq tokenize_name(std::string_view text) {
  TokenSeq out;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) out.push_back(std::exchange(current, {}));
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

std::string normalize_name(const TokenSeq& tokens) {
  std::string out;
  for (const auto& tok : tokens) {
    for (const auto& piece : tokenize_name(tok)) {
      if (!out.empty()) out.push_back(' ');
      out += piece;
    }
  }
  return out;
}

// --- Taxonomy -------------------------------------------------------------

namespace {

// Kahn's algorithm; returns false if some node never reaches in-degree 0.
bool topologically_sortable(const std::map<ConceptId, std::set<ConceptId>>& children,
                            std::map<ConceptId, std::size_t> indegree) {
  std::deque<ConceptId> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const ConceptId id = ready.front();
    ready.pop_front();
    ++seen;
    for (const auto& c : children.at(id)) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  return seen == indegree.size();
}

}  // namespace

Taxonomy::Taxonomy(std::vector<Concept> concepts, const std::vector<Edge>& edges,
                   std::size_t max_name_len) {
  for (auto& c : concepts) {
    if (c.id.empty()) throw FormatError("empty concept id");
    c.name = tokenize_name(join_tokens(c.name));
    if (c.name.empty()) throw FormatError("concept '" + c.id + "' has an empty name");
    if (c.name.size() > max_name_len) {
      throw FormatError("concept '" + c.id + "' has " + std::to_string(c.name.size()) +
                        " tokens, limit is " + std::to_string(max_name_len));
    }
    const std::string key = normalize_name(c.name);
    const ConceptId id = c.id;
    if (!nodes_.emplace(id, Node{std::move(c), {}, {}}).second) {
      throw DuplicateConcept("id '" + id + "'");
    }
    by_name_.emplace(key, id);
  }
  for (const auto& e : edges) {
    auto p = nodes_.find(e.parent);
    auto c = nodes_.find(e.child);
    if (p == nodes_.end()) throw UnknownConcept("edge parent '" + e.parent + "'");
    if (c == nodes_.end()) throw UnknownConcept("edge child '" + e.child + "'");
    if (e.parent == e.child) throw CyclicTaxonomy("self loop on '" + e.parent + "'");
    p->second.children.insert(e.child);
    c->second.parents.insert(e.parent);
  }
  std::map<ConceptId, std::set<ConceptId>> children;
  std::map<ConceptId, std::size_t> indegree;
  for (const auto& [id, n] : nodes_) {
    children[id] = n.children;
    indegree[id] = n.parents.size();
  }
  if (!topologically_sortable(children, std::move(indegree))) {
    throw CyclicTaxonomy("edge set contains a directed cycle");
  }
}

const Taxonomy::Node& Taxonomy::node(const ConceptId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownConcept("'" + id + "'");
  return it->second;
}

std::size_t Taxonomy::edge_count() const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes_) n += node.children.size();
  return n;
}

const Concept& Taxonomy::concept_of(const ConceptId& id) const { return node(id).info; }
const std::set<ConceptId>& Taxonomy::parents(const ConceptId& id) const { return node(id).parents; }
const std::set<ConceptId>& Taxonomy::children(const ConceptId& id) const { return node(id).children; }

std::vector<ConceptId> Taxonomy::ids() const {
  std::vector<ConceptId> out;
  out.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) out.push_back(id);
  return out;
}

std::vector<Concept> Taxonomy::concepts() const {
  std::vector<Concept> out;
  out.reserve(nodes_.size());
  for (const auto& [id, n] : nodes_) out.push_back(n.info);
  return out;
}

std::vector<Edge> Taxonomy::edges() const {
  std::vector<Edge> out;
  for (const auto& [id, n] : nodes_) {
    for (const auto& c : n.children) out.push_back({id, c});
  }
  return out;
}

std::vector<ConceptId> Taxonomy::roots() const {
  std::vector<ConceptId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.parents.empty()) out.push_back(id);
  }
  return out;
}

std::size_t Taxonomy::depth() const {
  // Longest path in nodes, memoized bottom-up.
  std::map<ConceptId, std::size_t> memo;
  std::size_t best = 0;
  for (const auto& root : roots()) {
    std::vector<std::pair<ConceptId, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      if (memo.contains(id)) continue;
      const auto& kids = children(id);
      if (!expanded) {
        stack.push_back({id, true});
        for (const auto& c : kids) {
          if (!memo.contains(c)) stack.push_back({c, false});
        }
        continue;
      }
      std::size_t d = 1;
      for (const auto& c : kids) d = std::max(d, memo.at(c) + 1);
      memo[id] = d;
    }
    best = std::max(best, memo.at(root));
  }
  return best;
}

std::optional<ConceptId> Taxonomy::find_by_name(const std::string& normalized) const {
  auto it = by_name_.find(normalized);
  if (it == by_name_.end()) return std::nullopt;
  ConceptId best = it->second;
  for (; it != by_name_.end() && it->first == normalized; ++it) best = std::min(best, it->second);
  return best;
}

// --- traversal ------------------------------------------------------------

namespace {

template <typename Next>
std::set<ConceptId> bfs(const Taxonomy& t, const ConceptId& v, std::size_t max_hops, Next next) {
  if (!t.contains(v)) throw UnknownConcept("'" + v + "'");
  std::set<ConceptId> seen;
  std::vector<ConceptId> frontier{v};
  for (std::size_t hop = 0; hop < max_hops && !frontier.empty(); ++hop) {
    std::vector<ConceptId> next_frontier;
    for (const auto& id : frontier) {
      for (const auto& n : next(id)) {
        if (n != v && seen.insert(n).second) next_frontier.push_back(n);
      }
    }
    frontier = std::move(next_frontier);
  }
  return seen;
}

}  // namespace

std::set<ConceptId> ancestors(const Taxonomy& t, const ConceptId& v, std::size_t max_hops) {
  return bfs(t, v, max_hops, [&](const ConceptId& id) -> const auto& { return t.parents(id); });
}

std::set<ConceptId> descendants(const Taxonomy& t, const ConceptId& v, std::size_t max_hops) {
  return bfs(t, v, max_hops, [&](const ConceptId& id) -> const auto& { return t.children(id); });
}

std::set<ConceptId> siblings(const Taxonomy& t, const ConceptId& v) {
  std::set<ConceptId> out;
  for (const auto& p : t.parents(v)) {
    for (const auto& c : t.children(p)) {
      if (c != v) out.insert(c);
    }
  }
  return out;
}

CandidatePosition mask_position(const Taxonomy& t, const ConceptId& v) {
  CandidatePosition pos;
  pos.parents = t.parents(v);
  pos.children = t.children(v);
  pos.label = PositionLabel::kValid;
  pos.masked = v;
  return pos;
}

void validate_position(const Taxonomy& t, const CandidatePosition& pos) {
  if (pos.parents.empty()) throw InvalidPosition("position has no parents");
  for (const auto& p : pos.parents) {
    if (!t.contains(p)) throw InvalidPosition("unknown parent '" + p + "'");
  }
  for (const auto& c : pos.children) {
    if (!t.contains(c)) throw InvalidPosition("unknown child '" + c + "'");
  }
  for (const auto& p : pos.parents) {
    if (pos.children.empty()) break;
    const auto below = descendants(t, p);
    for (const auto& c : pos.children) {
      if (!below.contains(c)) {
        throw InvalidPosition("'" + c + "' is not a descendant of '" + p + "'");
      }
    }
  }
}

Taxonomy insert_concept(const Taxonomy& t, const Concept& v, const CandidatePosition& pos) {
  if (t.contains(v.id)) throw DuplicateConcept("id '" + v.id + "'");
  validate_position(t, pos);
  auto concepts = t.concepts();
  concepts.push_back(v);
  std::vector<Edge> edges;
  for (auto& e : t.edges()) {
    if (pos.parents.contains(e.parent) && pos.children.contains(e.child)) continue;
    edges.push_back(std::move(e));
  }
  for (const auto& p : pos.parents) edges.push_back({p, v.id});
  for (const auto& c : pos.children) edges.push_back({v.id, c});
  return Taxonomy(std::move(concepts), edges, std::numeric_limits<std::size_t>::max());
}

Taxonomy remove_concept(const Taxonomy& t, const ConceptId& v) {
  const auto& ps = t.parents(v);
  const auto& cs = t.children(v);
  std::vector<Concept> concepts;
  for (auto& c : t.concepts()) {
    if (c.id != v) concepts.push_back(std::move(c));
  }
  std::set<Edge> edges;
  for (auto& e : t.edges()) {
    if (e.parent != v && e.child != v) edges.insert(std::move(e));
  }
  for (const auto& p : ps) {
    for (const auto& c : cs) edges.insert({p, c});
  }
  return Taxonomy(std::move(concepts), {edges.begin(), edges.end()},
                  std::numeric_limits<std::size_t>::max());
}

Taxonomy restrict_taxonomy(const Taxonomy& t, const std::set<ConceptId>& keep) {
  std::vector<Concept> concepts;
  for (const auto& id : keep) concepts.push_back(t.concept_of(id));
  std::set<Edge> edges;
  for (const auto& id : keep) {
    // Walk up through removed nodes until kept ones are met.
    std::set<ConceptId> visited;
    std::vector<ConceptId> stack(t.parents(id).begin(), t.parents(id).end());
    while (!stack.empty()) {
      ConceptId p = stack.back();
      stack.pop_back();
      if (!visited.insert(p).second) continue;
      if (keep.contains(p)) {
        edges.insert({p, id});
      } else {
        for (const auto& pp : t.parents(p)) stack.push_back(pp);
      }
    }
  }
  return Taxonomy(std::move(concepts), {edges.begin(), edges.end()},
                  std::numeric_limits<std::size_t>::max());
}

Split split_taxonomy(const Taxonomy& t, std::uint64_t seed) {
  const std::size_t n = t.size();
  if (n < 5) throw TaxonomyTooSmall(std::to_string(n) + " concepts, need at least 5");
  const auto held = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 5.0));
  std::vector<ConceptId> pool;
  Split split;
  for (const auto& id : t.ids()) {
    (t.is_root(id) ? split.train : pool).push_back(id);
  }
  if (pool.size() < 2 * held) {
    throw TaxonomyTooSmall("only " + std::to_string(pool.size()) +
                           " non-root concepts for two held-out parts of " +
                           std::to_string(held));
  }
  Rng rng(seed);
  rng.shuffle(std::span<ConceptId>(pool));
  split.validation.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(held));
  split.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(held),
                    pool.begin() + static_cast<std::ptrdiff_t>(2 * held));
  split.train.insert(split.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(2 * held),
                     pool.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// --- file I/O -------------------------------------------------------------

namespace {

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected a TAB");
    }
    fn(line.substr(0, tab), line.substr(tab + 1), lineno);
  }
}

}  // namespace

std::vector<Concept> load_concepts(const std::filesystem::path& path, std::size_t max_name_len) {
  std::vector<Concept> concepts;
  for_each_record(path, [&](std::string id, std::string name, std::size_t lineno) {
    Concept c{std::move(id), tokenize_name(name)};
    if (c.name.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": empty name");
    }
    if (c.name.size() > max_name_len) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": name too long");
    }
    concepts.push_back(std::move(c));
  });
  return concepts;
}

Taxonomy load_taxonomy(const std::filesystem::path& concepts_path,
                       const std::filesystem::path& edges_path, std::size_t max_name_len) {
  auto concepts = load_concepts(concepts_path, max_name_len);
  std::vector<Edge> edges;
  for_each_record(edges_path, [&](std::string p, std::string c, std::size_t) {
    edges.push_back({std::move(p), std::move(c)});
  });
  return Taxonomy(std::move(concepts), edges, max_name_len);
}

void save_taxonomy(const Taxonomy& t, const std::filesystem::path& concepts_path,
                   const std::filesystem::path& edges_path) {
  std::ofstream cs(concepts_path, std::ios::binary);
  std::ofstream es(edges_path, std::ios::binary);
  if (!cs) throw IOError("cannot write '" + concepts_path.string() + "'");
  if (!es) throw IOError("cannot write '" + edges_path.string() + "'");
  for (const auto& c : t.concepts()) cs << c.id << '\t' << join_tokens(c.name) << '\n';
  for (const auto& e : t.edges()) es << e.parent << '\t' << e.child << '\n';
}

}  // namespace taxo
