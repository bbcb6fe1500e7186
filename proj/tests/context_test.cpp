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

#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "taxo/context.hpp"
#include "taxo/errors.hpp"
#include "taxo/rng.hpp"
#include "taxo/synthetic.hpp"
#include "taxo/vocabulary.hpp"

using namespace taxo;
using taxo::testing::at;
using taxo::testing::protein_fixture;

namespace {

std::vector<std::string> render(const std::vector<RelationSentence>& ss, const TokenVocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& s : ss) out.push_back(join_tokens(vocab.decode(s.tokens)));
  return out;
}

std::set<ConceptId> nodes_of(const Subgraph& g) { return {g.nodes.begin(), g.nodes.end()}; }

}  // namespace

TEST_CASE("vocabulary reserves four fixed entries") {
  TokenVocabulary v;
  CHECK(v.size() == 4);
  CHECK(v.token(kMaskToken) == "[MASK]");
  CHECK(v.token(kEosToken) == "[EOS]");
  CHECK(v.token(kUnkToken) == "[UNK]");
  CHECK(v.token(kPadToken) == "[PAD]");
  CHECK(v.add("[EOS]") == kUnkToken);
  TokenId a = v.add("alpha");
  CHECK(v.add("alpha") == a);
  CHECK(v.id("missing") == kUnkToken);
  for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) CHECK(v.id(v.token(i)) == i);
}

TEST_CASE("vocabulary save and load") {
  taxo::testing::TempDir dir;
  TokenVocabulary v = build_vocabulary(protein_fixture());
  save_vocabulary(v, dir / "v.txt");
  CHECK(load_vocabulary(dir / "v.txt") == v);
}

TEST_CASE("build_sentences on the masked fixture concept") {
  Taxonomy t = protein_fixture();
  TokenVocabulary vocab = build_vocabulary(t);
  auto ss = build_sentences(t, mask_position(t, "bomp"), RelationSet{}, vocab);
  CHECK(render(ss, vocab) == std::vector<std::string>{
                                 "membrane proteins is a class of [MASK]",
                                 "porins is a subclass of [MASK]",
                                 "membrane transport proteins is a sibling of [MASK]",
                             });
  CHECK(ss[0].kind == RelationKind::kParent);
  CHECK(ss[1].kind == RelationKind::kChild);
  CHECK(ss[2].kind == RelationKind::kSibling);
  CHECK(ss[2].source == "transport");
  for (const auto& s : ss) {
    CHECK(s.tokens.back() == kMaskToken);
    // Stripping the template recovers the source name.
    const auto& tmpl = relation_template(s.kind);
    std::vector<TokenId> head(s.tokens.begin(), s.tokens.end() - static_cast<std::ptrdiff_t>(tmpl.size()) - 1);
    CHECK(vocab.decode(head) == t.name(s.source));
  }
}

TEST_CASE("build_sentences edge cases") {
  Taxonomy t = protein_fixture(false);
  TokenVocabulary vocab = build_vocabulary(t);
  SUBCASE("single parent only") {
    auto ss = build_sentences(t, at({"porins"}, {}), RelationSet{}, vocab);
    CHECK(ss.size() == 1);
  }
  SUBCASE("two-hop ancestors use the class template") {
    RelationSet r = RelationSet::parse("ancestor:2,child,sibling");
    auto ss = build_sentences(t, mask_position(t, "bomp"), r, vocab);
    auto text = render(ss, vocab);
    CHECK(text[0] == "membrane proteins is a class of [MASK]");
    CHECK(text[1] == "proteins is a class of [MASK]");
  }
  SUBCASE("no relation applies") {
    RelationSet r = RelationSet::parse("sibling");
    CHECK_THROWS_AS(build_sentences(t, at({"porins"}, {}), r, vocab), NoContext);
  }
}

TEST_CASE("relation set text round trip") {
  RelationSet r = RelationSet::parse("ancestor:2,child,sibling");
  CHECK(r.parents);
  CHECK(r.ancestor_hops == 2);
  CHECK(RelationSet::parse(r.to_string()) == r);
  CHECK(RelationSet::parse(RelationSet{}.to_string()) == RelationSet{});
  CHECK_THROWS_AS(RelationSet::parse("cousin"), ConfigError);
  CHECK_THROWS_AS(RelationSet::parse("ancestor:0"), ConfigError);
}

TEST_CASE("build_subgraphs") {
  Taxonomy t = protein_fixture(false);
  SUBCASE("two hops around the masked concept") {
    SubgraphPair g = build_subgraphs(t, mask_position(t, "bomp"), 2);
    CHECK(nodes_of(g.down) == std::set<ConceptId>{"membrane", "proteins"});
    CHECK(g.down.node_count() == 3);
    CHECK(g.down.edges.size() == 2);
    CHECK(nodes_of(g.up) == std::set<ConceptId>{"porins"});
    CHECK(g.up.edges.size() == 1);
  }
  SUBCASE("one hop") {
    SubgraphPair g = build_subgraphs(t, mask_position(t, "bomp"), 1);
    CHECK(nodes_of(g.down) == std::set<ConceptId>{"membrane"});
  }
  SUBCASE("isolated anchor") {
    Taxonomy solo({{"x", {"x"}}}, {});
    CandidatePosition pos;
    SubgraphPair g = build_subgraphs(solo, pos, 2);
    CHECK(g.down.node_count() == 1);
    CHECK(g.up.node_count() == 1);
    CHECK(g.down.edges.empty());
  }
  SUBCASE("node sets grow with k") {
    SyntheticConfig cfg;
    Taxonomy s = synthetic_taxonomy(cfg);
    for (const auto& v : s.ids()) {
      if (s.is_root(v)) continue;
      auto pos = mask_position(s, v);
      auto a = build_subgraphs(s, pos, 1), b = build_subgraphs(s, pos, 2), c = build_subgraphs(s, pos, 3);
      auto includes = [](const Subgraph& small, const Subgraph& big) {
        auto x = nodes_of(small), y = nodes_of(big);
        return std::includes(y.begin(), y.end(), x.begin(), x.end());
      };
      CHECK(includes(a.down, b.down));
      CHECK(includes(b.down, c.down));
      CHECK(includes(a.up, b.up));
      CHECK(includes(b.up, c.up));
    }
  }
  SUBCASE("edges are induced host edges, parent to child") {
    SubgraphPair g = build_subgraphs(t, mask_position(t, "bomp"), 2);
    for (const auto& [p, c] : g.down.edges) {
      if (p == Subgraph::kAnchor || c == Subgraph::kAnchor) {
        CHECK(c == Subgraph::kAnchor);
        continue;
      }
      CHECK(t.children(g.down.nodes[p - 1]).contains(g.down.nodes[c - 1]));
    }
  }
}

TEST_CASE("sample_negatives") {
  Taxonomy t = protein_fixture();
  CandidatePosition pos = mask_position(t, "bomp");
  Rng rng(3);
  SUBCASE("zero ratio") {
    CHECK(sample_negatives(t, pos, 0.0, rng).positions.empty());
  }
  SUBCASE("only one legal substitute") {
    auto neg = sample_negatives(t, pos, 1.0, rng);
    REQUIRE(neg.positions.size() == 1);
    const auto& n = neg.positions[0];
    CHECK(n.label == PositionLabel::kInvalid);
    CHECK((n.parents.contains("transport") || n.children.contains("transport")));
    CHECK(n != pos);
  }
  SUBCASE("starved pool") {
    auto neg = sample_negatives(protein_fixture(false), mask_position(protein_fixture(false), "bomp"), 2.0, rng);
    CHECK(neg.positions.empty());
    CHECK(neg.starved);
  }
  SUBCASE("negative ratio is rejected") {
    CHECK_THROWS_AS(sample_negatives(t, pos, -0.5, rng), ConfigError);
  }
}

TEST_CASE("sample_negatives count follows the ratio") {
  SyntheticConfig cfg;
  Taxonomy t = synthetic_taxonomy(cfg);
  CandidatePosition pos = mask_position(t, t.ids().back());
  Rng rng(11);
  std::size_t count = 0;
  for (int i = 0; i < 10000; ++i) count += sample_negatives(t, pos, 0.15, rng).positions.size();
  const double sigma = std::sqrt(10000 * 0.15 * 0.85);
  CHECK(std::abs(static_cast<double>(count) - 1500.0) < 3 * sigma);
}

TEST_CASE("negatives avoid related concepts and reproduce from a seed") {
  SyntheticConfig cfg;
  cfg.seed = 2;
  Taxonomy t = synthetic_taxonomy(cfg);
  for (const auto& v : t.ids()) {
    if (t.is_root(v)) continue;
    CandidatePosition pos = mask_position(t, v);
    Rng a(5), b(5);
    auto x = sample_negatives(t, pos, 3.0, a);
    auto y = sample_negatives(t, pos, 3.0, b);
    CHECK(x.positions == y.positions);
    std::set<ConceptId> forbidden = ancestors(t, v);
    forbidden.merge(descendants(t, v));
    forbidden.insert(v);
    for (const auto& n : x.positions) {
      for (const auto& p : n.parents) {
        if (!pos.parents.contains(p)) CHECK_FALSE(forbidden.contains(p));
      }
      for (const auto& c : n.children) {
        if (!pos.children.contains(c)) CHECK_FALSE(forbidden.contains(c));
      }
    }
  }
}

TEST_CASE("enumerate_candidate_positions") {
  Taxonomy chain = taxo::testing::chain_fixture();
  CHECK(enumerate_candidate_positions(chain, 1).size() == 7);
  CHECK(enumerate_candidate_positions(chain, 2).size() == 9);
  CHECK(enumerate_candidate_positions(Taxonomy({{"x", {"x"}}}, {}), 1).size() == 1);
  CHECK(enumerate_candidate_positions(chain, 2) == enumerate_candidate_positions(chain, 2));
  CHECK_THROWS_AS(enumerate_candidate_positions(chain, 0), ConfigError);
}

TEST_CASE("make_example labels follow the target") {
  Taxonomy t = protein_fixture();
  TokenVocabulary vocab = build_vocabulary(t);
  auto pos = mask_position(t, "bomp");
  auto valid = make_example(t, pos, RelationSet{}, 2, vocab, t.name("bomp"));
  CHECK(valid.validity_label == 1);
  CHECK(valid.target_name.has_value());
  auto invalid = make_example(t, pos, RelationSet{}, 2, vocab, std::nullopt);
  CHECK(invalid.validity_label == 0);
  CHECK_FALSE(invalid.target_name.has_value());
}
