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

#include "taxo/synthetic.hpp"

#include <algorithm>
#include <deque>
#include <iomanip>
#include <sstream>
#include <string>

#include "taxo/errors.hpp"
#include "taxo/rng.hpp"

namespace taxo {

namespace {

constexpr const char* kHeads[] = {"proteins", "enzymes", "receptors", "lipids", "cells",
                                  "vessels",  "tissues", "hormones",  "genes",  "channels"};

constexpr const char* kModifiers[] = {
    "membrane", "outer",    "bacterial", "transport", "nuclear",  "viral",    "plant",
    "human",    "signal",   "binding",   "surface",   "soluble",  "mobile",   "cardiac",
    "neural",   "renal",    "hepatic",   "muscle",    "immune",   "fungal",   "marine",
    "toxic",    "stable",   "rapid",     "early",     "late",     "primary",  "secondary",
    "inner",    "basal",    "apical",    "dorsal",    "ventral",  "synthetic", "native",
    "mutant",   "small",    "large",     "acidic",    "basic"};

std::string concept_id(std::size_t i, std::size_t width) {
  std::ostringstream os;
  os << 'c' << std::setw(static_cast<int>(width)) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

Taxonomy synthetic_taxonomy(const SyntheticConfig& cfg) {
  constexpr std::size_t kHeadCount = std::size(kHeads);
  constexpr std::size_t kModifierCount = std::size(kModifiers);
  if (cfg.roots == 0 || cfg.roots > kHeadCount) throw ConfigError("synthetic roots must be in [1, 10]");
  if (cfg.concepts < cfg.roots) throw ConfigError("fewer concepts than roots");
  if (cfg.min_children == 0 || cfg.min_children > cfg.max_children || cfg.max_children > kModifierCount) {
    throw ConfigError("bad synthetic branching range");
  }
  if (cfg.max_depth == 0 || cfg.max_depth > kDefaultMaxNameLen) throw ConfigError("bad synthetic depth");

  Rng rng = Rng::derive(cfg.seed, 0x73796e);
  const std::size_t width = std::to_string(cfg.concepts - 1).size();
  std::vector<Concept> concepts;
  std::vector<Edge> edges;
  std::vector<std::size_t> depth;
  std::deque<std::size_t> frontier;

  std::vector<std::size_t> heads(kHeadCount);
  for (std::size_t i = 0; i < kHeadCount; ++i) heads[i] = i;
  rng.shuffle(std::span<std::size_t>(heads));
  for (std::size_t r = 0; r < cfg.roots; ++r) {
    concepts.push_back({concept_id(concepts.size(), width), {kHeads[heads[r]]}});
    depth.push_back(1);
    frontier.push_back(concepts.size() - 1);
  }
  while (concepts.size() < cfg.concepts && !frontier.empty()) {
    const std::size_t parent = frontier.front();
    frontier.pop_front();
    if (depth[parent] >= cfg.max_depth) continue;
    const std::size_t want = cfg.min_children + rng.below(cfg.max_children - cfg.min_children + 1);
    std::vector<std::size_t> mods(kModifierCount);
    for (std::size_t i = 0; i < kModifierCount; ++i) mods[i] = i;
    rng.shuffle(std::span<std::size_t>(mods));
    const TokenSeq parent_name = concepts[parent].name;
    const ConceptId parent_id = concepts[parent].id;
    const std::size_t parent_depth = depth[parent];
    std::size_t made = 0;
    for (std::size_t m : mods) {
      if (made == want || concepts.size() == cfg.concepts) break;
      if (std::find(parent_name.begin(), parent_name.end(), kModifiers[m]) != parent_name.end()) continue;
      TokenSeq name{kModifiers[m]};
      name.insert(name.end(), parent_name.begin(), parent_name.end());
      concepts.push_back({concept_id(concepts.size(), width), std::move(name)});
      depth.push_back(parent_depth + 1);
      edges.push_back({parent_id, concepts.back().id});
      frontier.push_back(concepts.size() - 1);
      ++made;
    }
  }
  if (concepts.size() < cfg.concepts) throw ConfigError("synthetic shape too small for the requested size");
  return Taxonomy(std::move(concepts), edges);
}

std::vector<TokenSeq> synthetic_corpus(const Taxonomy& t, std::size_t mentions, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0x636f72);
  std::vector<TokenSeq> out;
  auto say = [&](std::initializer_list<const TokenSeq*> parts, std::initializer_list<const char*> glue) {
    // glue[i] goes before parts[i]; a trailing glue closes the sentence.
    TokenSeq s;
    auto g = glue.begin();
    for (const TokenSeq* p : parts) {
      if (g != glue.end()) {
        for (const auto& w : tokenize_name(*g++)) s.push_back(w);
      }
      s.insert(s.end(), p->begin(), p->end());
    }
    for (; g != glue.end(); ++g) {
      for (const auto& w : tokenize_name(*g)) s.push_back(w);
    }
    out.push_back(std::move(s));
  };
  for (const auto& id : t.ids()) {
    const TokenSeq& name = t.name(id);
    const std::vector<ConceptId> parents(t.parents(id).begin(), t.parents(id).end());
    const std::vector<ConceptId> children(t.children(id).begin(), t.children(id).end());
    for (std::size_t k = 0; k < mentions; ++k) {
      const std::uint64_t form = rng.below(5);
      if (form <= 1 && !parents.empty()) {
        const TokenSeq& p = t.name(parents[rng.below(parents.size())]);
        if (form == 0) {
          say({&name, &p}, {"", "is a kind of", "."});
        } else {
          say({&p, &name}, {"many", "such as", "were studied ."});
        }
      } else if (form == 2 && !children.empty()) {
        const TokenSeq& c = t.name(children[rng.below(children.size())]);
        say({&name, &c}, {"the class of", "includes", "."});
      } else if (form == 3) {
        say({&name}, {"we measured", "in each sample ."});
      } else {
        say({&name}, {"recent work on", "reports new results ."});
      }
    }
  }
  return out;
}

}  // namespace taxo
