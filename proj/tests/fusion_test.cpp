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
#include "taxo/errors.hpp"
#include "taxo/fusion.hpp"

using namespace taxo;
using ad::Tape;
using ad::Var;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, scale);
  return v;
}

}  // namespace

TEST_CASE("fuse_sentences") {
  ad::ParameterStore<double> store;
  Tape<double> tape(store);
  SUBCASE("single sentence") {
    Var h = tape.constant({0.2, -0.4});
    const Var states[] = {h};
    auto f = fuse_sentences(tape, tape.constant({1.0, 1.0}), states);
    CHECK(tape.value(f.weights)[0] == 1.0);
    CHECK(tape.copy(f.h_seq) == tape.copy(h));
  }
  SUBCASE("identical states split evenly") {
    Var h = tape.constant({0.2, -0.4});
    const Var states[] = {h, h};
    auto f = fuse_sentences(tape, tape.constant({0.7, 0.1}), states);
    CHECK(tape.value(f.weights)[0] == doctest::Approx(0.5));
    CHECK(tape.value(f.h_seq)[0] == doctest::Approx(0.2));
  }
  SUBCASE("hand softmax on two unit states") {
    const Var states[] = {tape.constant({1.0, 0.0}), tape.constant({0.0, 1.0})};
    // tanh(w · (1, 0)) = ln 2, tanh(w · (0, 1)) = 0
    auto f = fuse_sentences(tape, tape.constant({std::atanh(std::log(2.0)), 0.0}), states);
    CHECK(tape.value(f.weights)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(f.weights)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(f.h_seq)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(tape.value(f.h_seq)[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("no sentences") {
    CHECK_THROWS_AS(fuse_sentences(tape, tape.constant({1.0}), std::span<const Var>{}), NoContext);
  }
  SUBCASE("output stays in the convex hull") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      tape.clear();
      std::vector<Var> states;
      std::vector<std::vector<double>> raw;
      for (int s = 0; s < 4; ++s) {
        raw.push_back(random_vec(3, rng));
        states.push_back(tape.constant(raw.back()));
      }
      auto f = fuse_sentences(tape, tape.constant(random_vec(3, rng)), states);
      for (std::size_t i = 0; i < 3; ++i) {
        double lo = raw[0][i], hi = raw[0][i];
        for (const auto& r : raw) {
          lo = std::min(lo, r[i]);
          hi = std::max(hi, r[i]);
        }
        CHECK(tape.value(f.h_seq)[i] >= lo - 1e-12);
        CHECK(tape.value(f.h_seq)[i] <= hi + 1e-12);
      }
    }
  }
}

TEST_CASE("softmax ignores a shared shift of the scores") {
  ad::ParameterStore<double> store;
  Tape<double> tape(store);
  auto a = tape.copy(tape.softmax(tape.constant({0.3, -0.2, 0.9})));
  auto b = tape.copy(tape.softmax(tape.constant({5.3, 4.8, 5.9})));
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("fuse_graphs") {
  ad::ParameterStore<double> store;
  Tape<double> tape(store);
  SUBCASE("symmetric inputs") {
    Var w = tape.constant({0.5, -0.3});
    Var v = tape.constant({1.0, 2.0});
    auto f = fuse_graphs(tape, w, w, v, v);
    CHECK(tape.item(f.beta) == doctest::Approx(0.5));
    CHECK(tape.copy(f.v_graph) == tape.copy(v));
  }
  SUBCASE("score gap ln 3") {
    const double half = std::atanh(std::log(3.0) / 2.0);
    auto f = fuse_graphs(tape, tape.constant({half}), tape.constant({-half}), tape.constant({1.0}),
                         tape.constant({1.0}));
    CHECK(tape.item(f.beta) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("equal states pass through whatever beta is") {
    Var v = tape.constant({0.4, -1.0});
    auto f = fuse_graphs(tape, tape.constant({2.0, 1.0}), tape.constant({-1.0, 0.5}), v, v);
    CHECK(tape.value(f.v_graph)[0] == doctest::Approx(0.4));
    CHECK(tape.value(f.v_graph)[1] == doctest::Approx(-1.0));
  }
  SUBCASE("output lies on the segment") {
    Var d = tape.constant({0.0, 0.0}), u = tape.constant({2.0, 4.0});
    auto f = fuse_graphs(tape, tape.constant({0.1, 0.2}), tape.constant({0.3, 0.1}), d, u);
    const double beta = tape.item(f.beta);
    CHECK(tape.value(f.v_graph)[0] == doctest::Approx(2.0 * (1 - beta)));
    CHECK(tape.value(f.v_graph)[1] == doctest::Approx(4.0 * (1 - beta)));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(fuse_graphs(tape, tape.constant({1.0}), tape.constant({1.0, 2.0}), tape.constant({1.0}),
                                tape.constant({1.0, 2.0})),
                    ShapeError);
  }
}

TEST_CASE("fuse_all strategies") {
  ad::ParameterStore<double> store;
  Tape<double> tape(store);
  SUBCASE("concat") {
    auto v = tape.copy(fuse_all(tape, FusionStrategy::kConcat, tape.constant({1.0, 2.0}), tape.constant({3.0}), {}));
    CHECK(v == std::vector<double>{1, 2, 3});
  }
  // Identity projection so the strategies act on the raw pair.
  FuseParams p;
  const double eye[] = {1.0, 0.0, 0.0, 1.0};
  p.proj_w = tape.constant(eye, {2, 2});
  p.proj_b = tape.constant({0.0, 0.0});
  p.att = tape.constant({0.2, 0.4});
  SUBCASE("mean of a vector with itself") {
    Var x = tape.constant({1.5, -2.0});
    CHECK(tape.copy(fuse_all(tape, FusionStrategy::kMean, x, x, p)) == tape.copy(x));
  }
  SUBCASE("elementwise max") {
    auto v = tape.copy(fuse_all(tape, FusionStrategy::kMax, tape.constant({1.0, 5.0}), tape.constant({4.0, 2.0}), p));
    CHECK(v == std::vector<double>{4, 5});
  }
  SUBCASE("attention mix is convex") {
    auto v = tape.copy(fuse_all(tape, FusionStrategy::kAttention, tape.constant({0.0, 0.0}), tape.constant({1.0, 1.0}), p));
    CHECK(v[0] > 0.0);
    CHECK(v[0] < 1.0);
  }
  SUBCASE("missing projection") {
    CHECK_THROWS_AS(fuse_all(tape, FusionStrategy::kMean, tape.constant({1.0}), tape.constant({1.0}), {}), ConfigError);
  }
  CHECK_THROWS_AS(parse_fusion("bilinear"), ConfigError);
  for (auto s : {FusionStrategy::kMean, FusionStrategy::kMax, FusionStrategy::kAttention, FusionStrategy::kConcat}) {
    CHECK(parse_fusion(to_string(s)) == s);
  }
}

TEST_CASE("fusion invariants over random inputs at full size") {
  ad::ParameterStore<float> store;
  Rng rng(12);
  FusionLayer<float> layer(store, 200, 100, FusionStrategy::kConcat, rng);
  ad::Tape<float> tape(store);
  Rng data(13);
  for (int trial = 0; trial < 1000; ++trial) {
    tape.clear();
    const std::size_t n = 1 + data.below(6);
    std::vector<Var> states;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<float> h(200);
      for (auto& x : h) x = static_cast<float>(data.normal(0.0, 1.0));
      states.push_back(tape.constant(h));
    }
    auto sf = layer.sentences(tape, states);
    double sum = 0.0;
    for (float w : tape.value(sf.weights)) {
      CHECK(w > 0.0f);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
    std::vector<float> d(100), u(100);
    for (auto& x : d) x = static_cast<float>(data.normal(0.0, 3.0));
    for (auto& x : u) x = static_cast<float>(data.normal(0.0, 3.0));
    auto gf = layer.graphs(tape, tape.constant(d), tape.constant(u));
    const float beta = tape.item(gf.beta);
    CHECK(beta > 0.0f);
    CHECK(beta < 1.0f);
    CHECK(tape.shape(layer.combine(tape, sf.h_seq, gf.v_graph)).size() == 300);
  }
}

TEST_CASE("fusion gradients for every strategy") {
  for (auto strategy : {FusionStrategy::kMean, FusionStrategy::kMax, FusionStrategy::kAttention, FusionStrategy::kConcat}) {
    CAPTURE(to_string(strategy));
    ad::ParameterStore<double> store;
    Rng rng(20);
    FusionLayer<double> layer(store, 3, 2, strategy, rng);
    Rng data(21);
    const auto h1 = random_vec(3, data), h2 = random_vec(3, data), d = random_vec(2, data), u = random_vec(2, data);
    auto result = taxo::testing::check_gradients(store, [&](Tape<double>& t) {
      const Var states[] = {t.constant(h1), t.constant(h2)};
      auto sf = layer.sentences(t, states);
      auto gf = layer.graphs(t, t.constant(d), t.constant(u));
      Var fused = layer.combine(t, sf.h_seq, gf.v_graph);
      std::vector<double> w(t.shape(fused).size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.2 * static_cast<double>(i);
      return t.dot(fused, t.constant(w));
    });
    INFO(result.worst);
    CHECK(result.max_rel_error < 1e-4);
  }
}
