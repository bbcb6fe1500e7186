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
#include <vector>

#include "gradcheck.hpp"
#include "taxo/encoders.hpp"
#include "taxo/errors.hpp"

using namespace taxo;
using ad::Tape;
using ad::Var;

namespace {

ad::ParamId add_embeddings(ad::ParameterStore<double>& store, std::size_t vocab, std::size_t dim,
                           std::uint64_t seed) {
  Rng rng(seed);
  ad::Tensor<double> t({vocab, dim});
  for (auto& v : t.values) v = rng.normal(0.0, 1.0);
  return store.add("embeddings", t);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void set_identity_pair(ad::Tensor<double>& w) {
  // [I | I]: v' = tanh(v + a)
  std::fill(w.values.begin(), w.values.end(), 0.0);
  const std::size_t d = w.shape.rows;
  for (std::size_t i = 0; i < d; ++i) {
    w.at(i, i) = 1.0;
    w.at(i, d + i) = 1.0;
  }
}

std::vector<double> tanh_of(std::vector<double> v) {
  for (auto& x : v) x = std::tanh(x);
  return v;
}

std::vector<double> plus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace

TEST_CASE("sentence encoder output has the hidden size") {
  ad::ParameterStore<float> store;
  Rng rng(1);
  ad::Tensor<float> emb({10, 200});
  auto e = store.add("embeddings", emb);
  SequenceEncoder<float> enc(store, "seq", 200, 3, rng);
  Tape<float> tape(store);
  const TokenId tokens[] = {5, 6, 7, kMaskToken};
  Var h = enc.encode(tape, tape.param(e), tokens, 3, 0.0, nullptr);
  CHECK(tape.shape(h).size() == 200);
}

TEST_CASE("sentence encoder sees tokens before the mask") {
  ad::ParameterStore<double> store;
  auto e = add_embeddings(store, 12, 8, 3);
  Rng rng(2);
  SequenceEncoder<double> enc(store, "seq", 8, 2, rng);
  Tape<double> tape(store);
  const TokenId a[] = {5, 6, 7, kMaskToken};
  const TokenId b[] = {9, 6, 7, kMaskToken};
  auto ha = tape.copy(enc.encode(tape, tape.param(e), a, 3, 0.0, nullptr));
  auto hb = tape.copy(enc.encode(tape, tape.param(e), b, 3, 0.0, nullptr));
  CHECK(max_abs_diff(ha, hb) > 1e-6);
  // Inference mode is deterministic.
  auto again = tape.copy(enc.encode(tape, tape.param(e), a, 3, 0.0, nullptr));
  CHECK(again == ha);
}

TEST_CASE("zero weights and embeddings give a zero state") {
  ad::ParameterStore<double> store;
  auto e = store.add("embeddings", ad::Tensor<double>({6, 4}));
  Rng rng(2);
  SequenceEncoder<double> enc(store, "seq", 4, 3, rng);
  for (auto id : enc.param_ids()) std::fill(store[id].value.values.begin(), store[id].value.values.end(), 0.0);
  Tape<double> tape(store);
  const TokenId tokens[] = {4, 5, kMaskToken};
  auto h = tape.copy(enc.encode(tape, tape.param(e), tokens, 2, 0.0, nullptr));
  for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("empty sentence is refused") {
  ad::ParameterStore<double> store;
  auto e = add_embeddings(store, 6, 4, 1);
  Rng rng(2);
  SequenceEncoder<double> enc(store, "seq", 4, 1, rng);
  Tape<double> tape(store);
  CHECK_THROWS_AS(enc.encode(tape, tape.param(e), std::span<const TokenId>{}, 0, 0.0, nullptr), EmptySentence);
}

TEST_CASE("sentence encoder gradients") {
  ad::ParameterStore<double> store;
  auto e = add_embeddings(store, 8, 3, 5);
  Rng rng(6);
  SequenceEncoder<double> enc(store, "seq", 3, 2, rng);
  const TokenId tokens[] = {4, 5, 6, kMaskToken};
  auto result = taxo::testing::check_gradients(store, [&](Tape<double>& t) {
    Var h = enc.encode(t, t.param(e), tokens, 3, 0.0, nullptr);
    return t.dot(h, t.constant({0.3, -0.8, 0.5}));
  });
  INFO(result.worst);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("graph encoder output size and anchor-only graph") {
  ad::ParameterStore<double> store;
  Rng rng(3);
  GraphEncoder<double> enc(store, "g", 5, 100, 2, Aggregate::kMean, true, 0.1, rng);
  Tape<double> tape(store);
  EncodedSubgraph g{{GraphEncoder<double>::kAnchorRow}, {}};
  auto v = tape.copy(enc.encode(tape, g, GraphDirection::kDown));
  CHECK(v.size() == 100);

  // Hand propagation with zero aggregates.
  const auto& table = store[enc.node_table()].value;
  std::vector<double> x(table.values.begin(), table.values.begin() + 100);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& w = store[enc.layer_weight(k)].value;
    std::vector<double> next(100);
    for (std::size_t i = 0; i < 100; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 100; ++j) s += w.at(i, j) * x[j];
      next[i] = std::tanh(s);
    }
    x = next;
  }
  CHECK(max_abs_diff(v, x) < 1e-12);
  CHECK_THROWS_AS(enc.encode(tape, EncodedSubgraph{}, GraphDirection::kDown), MissingAnchor);
}

TEST_CASE("three-node chain with identity weights") {
  ad::ParameterStore<double> store;
  Rng rng(4);
  GraphEncoder<double> enc(store, "g", 2, 3, 2, Aggregate::kMean, true, 1.0, rng);
  for (std::size_t k = 0; k < 2; ++k) set_identity_pair(store[enc.layer_weight(k)].value);
  // anchor (row 0) <- membrane (row 2) <- proteins (row 3)
  EncodedSubgraph g{{0, 2, 3}, {{2, 1}, {1, 0}}};
  const auto& table = store[enc.node_table()].value;
  auto row = [&](std::size_t r) {
    return std::vector<double>(table.values.begin() + static_cast<std::ptrdiff_t>(3 * r),
                               table.values.begin() + static_cast<std::ptrdiff_t>(3 * r + 3));
  };
  const auto xa = row(0), xm = row(2), xp = row(3);
  const auto a1 = tanh_of(plus(xa, xm));
  const auto m1 = tanh_of(plus(xm, xp));
  const auto a2 = tanh_of(plus(a1, m1));

  Tape<double> tape(store);
  auto v = tape.copy(enc.encode(tape, g, GraphDirection::kDown));
  CHECK(max_abs_diff(v, a2) < 1e-12);

  // Bottom-up messages flow child -> parent, so the anchor hears nothing here.
  auto up = tape.copy(enc.encode(tape, g, GraphDirection::kUp));
  const auto a1_up = tanh_of(xa);
  const auto a2_up = tanh_of(a1_up);
  CHECK(max_abs_diff(up, a2_up) < 1e-12);
}

TEST_CASE("attention aggregate weights") {
  ad::ParameterStore<double> store;
  Rng rng(5);
  GraphEncoder<double> enc(store, "g", 6, 4, 2, Aggregate::kAttention, true, 1.0, rng);
  Tape<double> tape(store);
  GraphTrace<double> trace;
  SUBCASE("one neighbour gets weight one") {
    EncodedSubgraph g{{0, 2}, {{1, 0}}};
    enc.encode(tape, g, GraphDirection::kDown, &trace);
    REQUIRE(trace.attention[0][0].size() == 1);
    CHECK(trace.attention[0][0][0] == 1.0);
  }
  SUBCASE("identical neighbours split evenly") {
    EncodedSubgraph g{{0, 3, 3}, {{1, 0}, {2, 0}}};
    enc.encode(tape, g, GraphDirection::kDown, &trace);
    CHECK(trace.attention[0][0][0] == doctest::Approx(0.5));
    CHECK(trace.attention[0][0][1] == doctest::Approx(0.5));
  }
  SUBCASE("weights sum to one on random graphs") {
    Rng g_rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + g_rng.below(5);
      EncodedSubgraph g;
      for (std::size_t i = 0; i < n; ++i) g.rows.push_back(i == 0 ? 0 : 2 + g_rng.below(6));
      for (std::size_t i = 1; i < n; ++i) g.edges.push_back({i, g_rng.below(i)});
      enc.encode(tape, g, GraphDirection::kDown, &trace);
      for (const auto& layer : trace.attention) {
        for (const auto& w : layer) {
          if (w.empty()) continue;
          double s = 0.0;
          for (double x : w) s += x;
          CHECK(std::abs(s - 1.0) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("neighbour order does not matter") {
  for (Aggregate agg : {Aggregate::kMean, Aggregate::kAttention}) {
    ad::ParameterStore<double> store;
    Rng rng(8);
    GraphEncoder<double> enc(store, "g", 6, 4, 2, agg, true, 1.0, rng);
    Tape<double> tape(store);
    EncodedSubgraph a{{0, 2, 3, 4}, {{1, 0}, {2, 0}, {3, 0}, {3, 1}}};
    EncodedSubgraph b{{0, 2, 3, 4}, {{3, 1}, {3, 0}, {2, 0}, {1, 0}}};
    auto va = tape.copy(enc.encode(tape, a, GraphDirection::kDown));
    auto vb = tape.copy(enc.encode(tape, b, GraphDirection::kDown));
    CHECK(max_abs_diff(va, vb) < 1e-6);
  }
}

TEST_CASE("undirected mode ignores edge orientation") {
  ad::ParameterStore<double> store;
  Rng rng(9);
  GraphEncoder<double> enc(store, "g", 6, 4, 2, Aggregate::kMean, false, 1.0, rng);
  Tape<double> tape(store);
  EncodedSubgraph a{{0, 2, 3}, {{2, 1}, {1, 0}}};
  EncodedSubgraph flipped{{0, 2, 3}, {{1, 2}, {0, 1}}};
  auto va = tape.copy(enc.encode(tape, a, GraphDirection::kDown));
  auto vb = tape.copy(enc.encode(tape, flipped, GraphDirection::kDown));
  auto vc = tape.copy(enc.encode(tape, a, GraphDirection::kUp));
  CHECK(max_abs_diff(va, vb) < 1e-12);
  CHECK(max_abs_diff(va, vc) < 1e-12);
}

TEST_CASE("graph encoder gradients") {
  for (Aggregate agg : {Aggregate::kMean, Aggregate::kAttention}) {
    ad::ParameterStore<double> store;
    Rng rng(10);
    GraphEncoder<double> enc(store, "g", 4, 3, 2, agg, true, 1.0, rng);
    EncodedSubgraph g{{0, 2, 3, 5}, {{1, 0}, {2, 0}, {3, 1}}};
    auto result = taxo::testing::check_gradients(store, [&](Tape<double>& t) {
      return t.dot(enc.encode(t, g, GraphDirection::kDown), t.constant({0.4, -0.7, 0.9}));
    });
    INFO(result.worst);
    CHECK(result.max_rel_error < 1e-4);
  }
}
