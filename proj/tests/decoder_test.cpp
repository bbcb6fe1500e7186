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

#include <algorithm>
#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "taxo/decoder.hpp"
#include "taxo/errors.hpp"

using namespace taxo;
using ad::Tape;
using ad::Var;

namespace {

constexpr std::size_t kHidden = 4, kGraph = 3, kFused = 7, kReadout = 5;

struct Fixture {
  explicit Fixture(std::size_t vocab, std::uint64_t seed = 1) : rng(seed) {
    ad::Tensor<double> emb({vocab, kHidden});
    for (auto& v : emb.values) v = rng.normal(0.0, 1.0);
    embeddings = store.add("embeddings", emb);
    head = GeneratorHead<double>(store, kHidden, kGraph, kFused, kReadout, vocab, rng);
    for (auto* v : {&h_seq, &v_graph, &v_fuse}) v->clear();
    for (std::size_t i = 0; i < kHidden; ++i) h_seq.push_back(rng.normal(0.0, 1.0));
    for (std::size_t i = 0; i < kGraph; ++i) v_graph.push_back(rng.normal(0.0, 1.0));
    for (std::size_t i = 0; i < kFused; ++i) v_fuse.push_back(rng.normal(0.0, 1.0));
  }

  void make_uniform() {
    for (auto id : {head.output_weight(), head.output_bias()}) {
      std::fill(store[id].value.values.begin(), store[id].value.values.end(), 0.0);
    }
  }

  Var loss(Tape<double>& t, std::span<const TokenId> target) const {
    return head.loss(t, t.param(embeddings), target, t.constant(h_seq), t.constant(v_graph), t.constant(v_fuse));
  }

  Generation<double> generate(Tape<double>& t, std::size_t max_len) const {
    return head.generate(t, t.param(embeddings), t.constant(h_seq), t.constant(v_graph), t.constant(v_fuse), max_len);
  }

  Rng rng;
  ad::ParameterStore<double> store;
  ad::ParamId embeddings = 0;
  GeneratorHead<double> head;
  std::vector<double> h_seq, v_graph, v_fuse;
};

}  // namespace

TEST_CASE("classifier head") {
  ad::ParameterStore<double> store;
  Rng rng(2);
  ClassifierHead<double> head(store, 6, 5, 4, rng);
  Tape<double> tape(store);
  SUBCASE("outputs stay inside (0, 1)") {
    for (double scale : {0.1, 1.0, 100.0}) {
      tape.clear();
      std::vector<double> x(6);
      for (auto& v : x) v = rng.normal(0.0, scale);
      const double p = tape.item(head.forward(tape, tape.constant(x)));
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
  SUBCASE("zero final layer gives one half") {
    for (auto id : {head.final_weight(), head.final_bias()}) {
      std::fill(store[id].value.values.begin(), store[id].value.values.end(), 0.0);
    }
    CHECK(tape.item(head.forward(tape, tape.constant({1, 2, 3, 4, 5, 6}))) == 0.5);
  }
  SUBCASE("wrong input size") {
    CHECK_THROWS_AS(head.forward(tape, tape.constant({1.0, 2.0})), ShapeError);
  }
}

TEST_CASE("classification loss values") {
  ad::ParameterStore<double> store;
  Tape<double> tape(store);
  CHECK(tape.item(loss_l1(tape, tape.constant({0.5}), 1)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(tape.item(loss_l1(tape, tape.constant({0.9}), 0)) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(tape.item(loss_l1(tape, tape.constant({1.0 - 1e-9}), 1)) < 1e-6);
}

TEST_CASE("uniform readout") {
  Fixture f(10);
  f.make_uniform();
  Tape<double> tape(f.store);
  SUBCASE("teacher-forced loss of a two-token target is 3 ln 10") {
    const TokenId target[] = {5, 7};
    CHECK(tape.item(f.loss(tape, target)) == doctest::Approx(3.0 * std::log(10.0)).epsilon(1e-12));
  }
  SUBCASE("greedy picks the lowest eligible index, which is [EOS]") {
    auto g = f.generate(tape, 12);
    CHECK(g.tokens.empty());
    CHECK(g.finished);
    REQUIRE(g.log_probs.size() == 1);
    CHECK(g.log_probs[0] == doctest::Approx(-std::log(10.0)));
  }
}

TEST_CASE("readout probabilities sum to one") {
  Fixture f(9, 3);
  Tape<double> tape(f.store);
  Var state = tape.constant(f.h_seq);
  for (TokenId prev : {kEosToken, TokenId{5}, TokenId{8}}) {
    auto s = f.head.step(tape, tape.param(f.embeddings), prev, state, tape.constant(f.v_graph), tape.constant(f.v_fuse));
    double sum = 0.0;
    for (double p : tape.value(tape.softmax(s.logits))) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-6);
    state = s.state;
  }
}

TEST_CASE("greedy decoding") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Fixture f(12, seed);
    // Push the readout away from uniform so names of several tokens appear.
    for (auto& v : f.store[f.head.output_weight()].value.values) v *= 4.0;
    Tape<double> tape(f.store);
    auto g = f.generate(tape, 12);
    CHECK(g.tokens.size() <= 12);
    for (TokenId t : g.tokens) {
      CHECK(t != kMaskToken);
      CHECK(t != kPadToken);
      CHECK(t != kEosToken);
    }
    CHECK(g.log_probs.size() == g.tokens.size() + (g.finished ? 1 : 0));
    auto capped = f.generate(tape, 1);
    CHECK(capped.tokens.size() <= 1);
    if (g.finished && !g.tokens.empty()) {
      // Teacher forcing on the greedy output reproduces its log-probs.
      double sum = 0.0;
      for (double lp : g.log_probs) sum += lp;
      tape.clear();
      CHECK(tape.item(f.loss(tape, g.tokens)) == doctest::Approx(-sum).epsilon(1e-10));
    }
  }
}

TEST_CASE("out-of-range target tokens count as [UNK]") {
  Fixture f(10, 4);
  Tape<double> tape(f.store);
  const TokenId odd[] = {5, 99, -3};
  const TokenId unk[] = {5, kUnkToken, kUnkToken};
  CHECK(tape.item(f.loss(tape, odd)) == tape.item(f.loss(tape, unk)));
  CHECK_THROWS_AS(f.loss(tape, std::span<const TokenId>{}), ShapeError);
}

TEST_CASE("generator gradients") {
  Fixture f(8, 5);
  const TokenId target[] = {4, 6, 5};
  auto result = taxo::testing::check_gradients(f.store, [&](Tape<double>& t) { return f.loss(t, target); });
  INFO(result.worst);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("classifier gradients") {
  ad::ParameterStore<double> store;
  Rng rng(6);
  ClassifierHead<double> head(store, 5, 4, 3, rng);
  const std::vector<double> x = {0.2, -0.7, 1.1, 0.05, -0.4};
  for (int y : {0, 1}) {
    auto result = taxo::testing::check_gradients(store, [&](Tape<double>& t) {
      return loss_l1(t, head.forward(t, t.constant(x)), y);
    });
    INFO(result.worst);
    CHECK(result.max_rel_error < 1e-4);
  }
}
