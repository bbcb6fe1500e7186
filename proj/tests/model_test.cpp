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
#include <sstream>
#include <vector>

#include "gradcheck.hpp"
#include "support.hpp"
#include "taxo/checkpoint.hpp"
#include "taxo/errors.hpp"
#include "taxo/model.hpp"

using namespace taxo;
using taxo::testing::protein_fixture;

namespace {

ModelConfig tiny_config(std::size_t vocab, std::size_t nodes) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.node_count = nodes;
  cfg.hidden_dim = 4;
  cfg.graph_dim = 3;
  cfg.seq_layers = 1;
  cfg.graph_layers = 2;
  cfg.classifier_hidden1 = 4;
  cfg.classifier_hidden2 = 3;
  cfg.readout_dim = 5;
  cfg.dropout = 0.0;
  cfg.init_scale = 0.5;
  return cfg;
}

struct World {
  World() : t(protein_fixture()), vocab(build_vocabulary(t)), nodes(t.ids()) {
    auto pos = mask_position(t, "bomp");
    valid = encode_example(make_example(t, pos, RelationSet{}, 2, vocab, t.name("bomp")), nodes, vocab);
    auto neg = taxo::testing::at({"porins"}, {"transport"});
    invalid = encode_example(make_example(t, neg, RelationSet{}, 2, vocab, std::nullopt), nodes, vocab);
  }
  Taxonomy t;
  TokenVocabulary vocab;
  NodeIndex nodes;
  EncodedExample valid, invalid;
};

template <typename T>
double max_param_diff(const Model<T>& a, const Model<T>& b) {
  double m = 0.0;
  for (ad::ParamId id = 0; id < a.params().size(); ++id) {
    const auto& x = a.params()[id].value.values;
    const auto& y = b.params()[id].value.values;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(double(x[i]) - double(y[i])));
  }
  return m;
}

}  // namespace

TEST_CASE("encode_example lowers ids to rows") {
  World w;
  CHECK(w.valid.label == 1);
  CHECK(w.invalid.label == 0);
  CHECK(w.valid.target == w.vocab.encode(w.t.name("bomp")));
  CHECK(w.invalid.target.empty());
  CHECK(w.valid.down.rows[0] == GraphEncoder<float>::kAnchorRow);
  CHECK(w.nodes.row("bomp") == NodeIndex::kFirstRow + 0);
  CHECK(w.nodes.row("not-a-concept") == GraphEncoder<float>::kUnknownRow);
}

TEST_CASE("model initialization is seeded") {
  World w;
  auto cfg = tiny_config(w.vocab.size(), w.nodes.size());
  Model<double> a(cfg, 7), b(cfg, 7), c(cfg, 8);
  CHECK(max_param_diff(a, b) == 0.0);
  CHECK(max_param_diff(a, c) > 0.0);
}

TEST_CASE("down and up encoders share no parameters") {
  World w;
  Model<double> m(tiny_config(w.vocab.size(), w.nodes.size()), 1);
  std::size_t down = 0, up = 0;
  for (const auto& p : m.params()) {
    if (p.name.rfind("graph.down", 0) == 0) ++down;
    if (p.name.rfind("graph.up", 0) == 0) ++up;
  }
  CHECK(down > 0);
  CHECK(down == up);
  CHECK(m.down_encoder().node_table() != m.up_encoder().node_table());
  const auto& dt = m.params()[m.down_encoder().node_table()].value.values;
  const auto& ut = m.params()[m.up_encoder().node_table()].value.values;
  CHECK(dt != ut);
}

TEST_CASE("joint loss sums the per-example terms") {
  World w;
  Model<double> m(tiny_config(w.vocab.size(), w.nodes.size()), 3);
  const EncodedExample batch[] = {w.valid, w.invalid};
  ad::Tape<double> tape(m.params());
  const auto lv = m.example_loss(tape, w.valid, 2.0);
  const double l1v = tape.item(lv.l1), l2v = tape.item(lv.l2);
  tape.clear();
  const auto li = m.example_loss(tape, w.invalid, 2.0);
  CHECK_FALSE(li.l2.valid());
  const double l1i = tape.item(li.l1);

  const auto b = joint_loss<double>(batch, m, 2.0);
  CHECK(b.valid == 1);
  CHECK(b.invalid == 1);
  CHECK(b.l1 == doctest::Approx(l1v + l1i).epsilon(1e-12));
  CHECK(b.l2 == doctest::Approx(l2v).epsilon(1e-12));
  CHECK(b.joint == doctest::Approx(l1v + 2.0 * l2v + l1i).epsilon(1e-12));
  const auto zero = joint_loss<double>(batch, m, 0.0);
  CHECK(zero.joint == doctest::Approx(zero.l1).epsilon(1e-12));
  CHECK_THROWS_AS(joint_loss<double>(std::span<const EncodedExample>{}, m, 2.0), ShapeError);
}

TEST_CASE("full model gradients") {
  World w;
  for (auto fusion : {FusionStrategy::kConcat, FusionStrategy::kAttention}) {
    CAPTURE(to_string(fusion));
    auto cfg = tiny_config(w.vocab.size(), w.nodes.size());
    cfg.fusion = fusion;
    cfg.seq_layers = 2;
    Model<double> m(cfg, 4);
    for (const EncodedExample* ex : {&w.valid, &w.invalid}) {
      auto result = taxo::testing::check_gradients(
          m.params(), [&](ad::Tape<double>& t) { return m.example_loss(t, *ex, 2.0).total; });
      INFO(result.worst);
      CHECK(result.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("lambda zero leaves the generator untouched") {
  World w;
  Model<double> m(tiny_config(w.vocab.size(), w.nodes.size()), 5);
  ad::GradientBuffer<double> grads(m.params());
  {
    ad::Tape<double> tape(m.params(), &grads);
    tape.backward(m.example_loss(tape, w.valid, 0.0).total);
  }
  for (auto id : m.generator().param_ids()) {
    for (double g : grads[id]) CHECK(g == 0.0);
  }
  double classifier_norm = 0.0;
  for (auto id : {m.classifier().final_weight(), m.classifier().final_bias()}) {
    for (double g : grads[id]) classifier_norm += g * g;
  }
  CHECK(classifier_norm > 0.0);
}

TEST_CASE("masked-token loss") {
  World w;
  Model<double> m(tiny_config(w.vocab.size(), w.nodes.size()), 6);
  const std::vector<TokenId> tokens = {5, kMaskToken, 7};
  SUBCASE("zero embeddings give a uniform prediction") {
    auto& emb = m.params()[m.embeddings()].value.values;
    std::fill(emb.begin(), emb.end(), 0.0);
    ad::Tape<double> tape(m.params());
    const double loss = tape.item(m.mct_loss(tape, tokens, 1, 6));
    CHECK(loss == doctest::Approx(std::log(double(w.vocab.size()))).epsilon(1e-12));
  }
  SUBCASE("targets outside the vocabulary are refused") {
    ad::Tape<double> tape(m.params());
    CHECK_THROWS_AS(m.mct_loss(tape, tokens, 1, TokenId(w.vocab.size())), ShapeError);
  }
  SUBCASE("gradients") {
    auto result = taxo::testing::check_gradients(
        m.params(), [&](ad::Tape<double>& t) { return m.mct_loss(t, tokens, 1, 6); });
    INFO(result.worst);
    CHECK(result.max_rel_error < 1e-4);
  }
}

TEST_CASE("transfer_weights copies the sentence encoder only") {
  World w;
  auto cfg = tiny_config(w.vocab.size(), w.nodes.size());
  Model<double> pre(cfg, 10), fresh(cfg, 11);
  const Model<double> before(cfg, 11);
  transfer_weights(pre, w.vocab, fresh, w.vocab);
  for (ad::ParamId id = 0; id < fresh.params().size(); ++id) {
    const auto& name = fresh.params()[id].name;
    const bool transferable = name == "embeddings" || name.rfind("seq", 0) == 0;
    const auto& expected = transferable ? pre.params()[id].value.values : before.params()[id].value.values;
    CHECK_MESSAGE(fresh.params()[id].value.values == expected, name);
  }

  TokenVocabulary other = w.vocab;
  other.add("zeolite");
  auto other_cfg = cfg;
  other_cfg.vocab_size = other.size();
  Model<double> other_model(other_cfg, 12);
  CHECK_THROWS_AS(transfer_weights(pre, w.vocab, other_model, other), VocabMismatch);

  auto deeper = cfg;
  deeper.seq_layers = 2;
  Model<double> deep(deeper, 13);
  CHECK_THROWS_AS(transfer_weights(pre, w.vocab, deep, w.vocab), ShapeError);
}

TEST_CASE("checkpoint round trip") {
  World w;
  auto cfg = tiny_config(w.vocab.size(), w.nodes.size());
  cfg.fusion = FusionStrategy::kMax;
  cfg.aggregate = Aggregate::kAttention;
  Model<float> m(cfg, 21);
  std::stringstream buf;
  write_checkpoint(buf, m, w.vocab, w.nodes);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "GTX1");

  std::istringstream in(bytes);
  Checkpoint ck = read_checkpoint(in);
  CHECK(ck.vocab == w.vocab);
  CHECK(ck.nodes == w.nodes);
  CHECK(ck.model.config() == cfg);
  REQUIRE(ck.model.params().size() == m.params().size());
  CHECK(max_param_diff(ck.model, m) == 0.0);

  // Same predictions after reload.
  ad::Tape<float> a(m.params()), b(ck.model.params());
  CHECK(a.item(m.classify(a, m.encode(a, w.valid))) == b.item(ck.model.classify(b, ck.model.encode(b, w.valid))));

  // Writing the reloaded model gives the same bytes.
  std::stringstream again;
  write_checkpoint(again, ck.model, ck.vocab, ck.nodes);
  CHECK(again.str() == bytes);

  SUBCASE("bad magic") {
    std::istringstream bad("XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_checkpoint(bad), FormatError);
  }
  SUBCASE("truncated") {
    std::istringstream cut(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_checkpoint(cut), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ckpt"), IOError);
  }
}
