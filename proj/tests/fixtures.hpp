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

#include <set>
#include <utility>
#include <vector>

#include "taxo/metrics.hpp"
#include "taxo/taxonomy.hpp"

namespace taxo::testing {

// Hand-scored completion fixture: ten insertions against six test concepts.
struct CompletionFixture {
  Taxonomy gold;
  std::set<ConceptId> test_ids;
  std::vector<Insertion> predictions;
  std::vector<bool> correct;  // per insertion, scored by hand
  MetricsReport expected;
};

inline CompletionFixture completion_fixture() {
  CompletionFixture f;
  f.gold = Taxonomy(
      {
          {"proteins", {"proteins"}},
          {"membrane", {"membrane", "proteins"}},
          {"bomp", {"bacterial", "outer", "membrane", "proteins"}},
          {"porins", {"porins"}},
          {"transport", {"membrane", "transport", "proteins"}},
          {"enzymes", {"enzymes"}},
          {"kinases", {"protein", "kinases"}},
          {"lipids", {"lipids"}},
          {"sterols", {"sterols"}},
          {"cholesterol", {"cholesterol"}},
      },
      {
          {"proteins", "membrane"},
          {"membrane", "bomp"},
          {"bomp", "porins"},
          {"membrane", "transport"},
          {"proteins", "enzymes"},
          {"enzymes", "kinases"},
          {"lipids", "sterols"},
          {"sterols", "cholesterol"},
      });
  f.test_ids = {"bomp", "porins", "transport", "kinases", "sterols", "cholesterol"};
  auto add = [&](const char* id, TokenSeq name, std::set<ConceptId> parents, std::set<ConceptId> children,
                 double p, bool ok) {
    CandidatePosition pos;
    pos.parents = std::move(parents);
    pos.children = std::move(children);
    f.predictions.push_back({id, std::move(name), std::move(pos), p});
    f.correct.push_back(ok);
  };
  add("g1", {"bacterial", "outer", "membrane", "proteins"}, {"membrane"}, {"porins"}, 0.99, true);
  add("g2", {"Porins"}, {"bomp"}, {}, 0.97, true);                                   // case-folded match
  add("g3", {"membrane", "transport", "proteins"}, {"proteins"}, {}, 0.95, false);   // wrong parent
  add("g4", {"protein", "kinases"}, {"enzymes"}, {}, 0.93, true);
  add("g5", {"protein", "kinases"}, {}, {}, 0.91, true);                             // same concept again
  add("g6", {"sterols"}, {"lipids"}, {"cholesterol"}, 0.90, true);
  add("g7", {"cholesterols"}, {"sterols"}, {}, 0.88, false);                         // name differs
  add("g8", {"enzymes"}, {"proteins"}, {}, 0.86, false);                             // not a test concept
  add("g9", {"sterols"}, {"lipids", "proteins"}, {}, 0.84, false);                   // extra parent
  add("g10", {"membrane", "transport", "proteins"}, {"membrane"}, {"bomp"}, 0.82, false);  // extra child

  // Distinct test concepts matched: bomp, porins, kinases, sterols.
  f.expected.counts.inserted = 10;
  f.expected.counts.correct = 4;
  f.expected.counts.total_test = 6;
  f.expected.precision = 0.4;
  f.expected.recall = 4.0 / 6.0;
  f.expected.f1 = 0.5;
  return f;
}

// Hand-counted generation fixture: six (generated, gold) pairs.
struct GenerationFixture {
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs;
  GenerationScore expected;
};

inline GenerationFixture generation_fixture() {
  GenerationFixture f;
  f.pairs = {
      {{"porins"}, {"porins"}},                                                                      // uni, hit
      {{"Porins"}, {"porins"}},                                                                      // uni, hit
      {{"sterol"}, {"sterols"}},                                                                     // uni, miss
      {{"bacterial", "outer", "membrane", "proteins"}, {"bacterial", "outer", "membrane", "proteins"}},  // multi, hit
      {{"membrane", "proteins"}, {"membrane", "transport", "proteins"}},                             // multi, miss
      {{}, {"protein", "kinases"}},                                                                  // multi, miss
  };
  auto& g = f.expected;
  g.total = 6;
  g.correct = 3;
  g.uni_total = 3;
  g.uni_correct = 2;
  g.multi_total = 3;
  g.multi_correct = 1;
  g.acc = 0.5;
  g.acc_uni = 2.0 / 3.0;
  g.acc_multi = 1.0 / 3.0;
  return f;
}

}  // namespace taxo::testing
