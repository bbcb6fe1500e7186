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

#include "taxo/model.hpp"

#include <algorithm>

#include "init.hpp"
#include "taxo/errors.hpp"

namespace taxo {

using ad::Var;

NodeIndex::NodeIndex(std::vector<ConceptId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  for (std::size_t i = 0; i < ids_.size(); ++i) rows_.emplace(ids_[i], kFirstRow + i);
}

std::size_t NodeIndex::row(const ConceptId& id) const {
  auto it = rows_.find(id);
  return it == rows_.end() ? GraphEncoder<float>::kUnknownRow : it->second;
}

namespace {

EncodedSubgraph lower(const Subgraph& g, const NodeIndex& nodes) {
  EncodedSubgraph out;
  out.rows.reserve(g.node_count());
  out.rows.push_back(GraphEncoder<float>::kAnchorRow);
  for (const auto& id : g.nodes) out.rows.push_back(nodes.row(id));
  out.edges = g.edges;
  return out;
}

}  // namespace

EncodedExample encode_example(const TrainingExample& ex, const NodeIndex& nodes,
                              const TokenVocabulary& vocab) {
  EncodedExample out;
  out.sentences.reserve(ex.sentences.size());
  for (const auto& s : ex.sentences) out.sentences.push_back(s.tokens);
  out.down = lower(ex.subgraphs.down, nodes);
  out.up = lower(ex.subgraphs.up, nodes);
  if (ex.target_name) out.target = vocab.encode(*ex.target_name);
  out.label = ex.validity_label;
  return out;
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t h = cfg_.hidden_dim;
  // One stream per component so that toggling one option leaves the
  // initial weights of the others unchanged.
  Rng r0 = Rng::derive(seed, 0);
  embeddings_ = store_.add("embeddings", detail::normal_init<T>({cfg_.vocab_size, h}, cfg_.token_init_scale, r0));
  mct_bias_ = store_.add("mct.bias", ad::Tensor<T>(ad::vec(cfg_.vocab_size)));
  Rng r1 = Rng::derive(seed, 1);
  sequence_ = SequenceEncoder<T>(store_, "seq", h, cfg_.seq_layers, r1);
  Rng r2 = Rng::derive(seed, 2);
  down_ = GraphEncoder<T>(store_, "graph.down", cfg_.node_count, cfg_.graph_dim, cfg_.graph_layers,
                          cfg_.aggregate, cfg_.directed, cfg_.init_scale, r2);
  Rng r3 = Rng::derive(seed, 3);
  up_ = GraphEncoder<T>(store_, "graph.up", cfg_.node_count, cfg_.graph_dim, cfg_.graph_layers,
                        cfg_.aggregate, cfg_.directed, cfg_.init_scale, r3);
  Rng r4 = Rng::derive(seed, 4);
  fusion_ = FusionLayer<T>(store_, h, cfg_.graph_dim, cfg_.fusion, r4);
  Rng r5 = Rng::derive(seed, 5);
  classifier_ = ClassifierHead<T>(store_, cfg_.classifier_input_dim(), cfg_.classifier_hidden1,
                                  cfg_.classifier_hidden2, r5);
  Rng r6 = Rng::derive(seed, 6);
  generator_ = GeneratorHead<T>(store_, h, cfg_.graph_dim, cfg_.fused_dim(), cfg_.readout_dim,
                                cfg_.vocab_size, r6);
}

template <typename T>
Encoding<T> Model<T>::encode(ad::Tape<T>& tape, const EncodedExample& ex, Rng* dropout_rng) const {
  if (ex.sentences.empty()) throw NoContext("example has no relation sentences");
  Encoding<T> enc;
  enc.embeddings = tape.param(embeddings_);
  std::vector<Var> states;
  states.reserve(ex.sentences.size());
  for (const auto& s : ex.sentences) {
    if (s.empty()) throw EmptySentence("empty relation sentence");
    states.push_back(sequence_.encode(tape, enc.embeddings, s, s.size() - 1, cfg_.dropout, dropout_rng));
  }
  auto sf = fusion_.sentences(tape, states);
  Var v_down = down_.encode(tape, ex.down, GraphDirection::kDown);
  Var v_up = up_.encode(tape, ex.up, GraphDirection::kUp);
  auto gf = fusion_.graphs(tape, v_down, v_up);
  enc.h_seq = sf.h_seq;
  enc.sentence_weights = sf.weights;
  enc.v_graph = gf.v_graph;
  enc.beta = gf.beta;
  enc.v_fuse = fusion_.combine(tape, enc.h_seq, enc.v_graph);
  if (dropout_rng != nullptr) enc.v_fuse = tape.dropout(enc.v_fuse, cfg_.dropout, *dropout_rng);
  return enc;
}

template <typename T>
Var Model<T>::classify(ad::Tape<T>& tape, const Encoding<T>& enc) const {
  if (cfg_.classifier_input == ClassifierInput::kFused) return classifier_.forward(tape, enc.v_fuse);
  return classifier_.forward(tape, generate(tape, enc).final_state);
}

template <typename T>
Var Model<T>::name_loss(ad::Tape<T>& tape, const Encoding<T>& enc,
                        std::span<const TokenId> target) const {
  return generator_.loss(tape, enc.embeddings, target, enc.h_seq, enc.v_graph, enc.v_fuse);
}

template <typename T>
Generation<T> Model<T>::generate(ad::Tape<T>& tape, const Encoding<T>& enc) const {
  return generate(tape, enc, cfg_.max_name_len);
}

template <typename T>
Generation<T> Model<T>::generate(ad::Tape<T>& tape, const Encoding<T>& enc,
                                 std::size_t max_len) const {
  return generator_.generate(tape, enc.embeddings, enc.h_seq, enc.v_graph, enc.v_fuse, max_len);
}

template <typename T>
ExampleLoss<T> Model<T>::example_loss(ad::Tape<T>& tape, const EncodedExample& ex, double lambda,
                                      Rng* dropout_rng) const {
  Encoding<T> enc = encode(tape, ex, dropout_rng);
  ExampleLoss<T> out;
  out.l1 = loss_l1(tape, classify(tape, enc), ex.label);
  if (ex.label == 1) {
    if (ex.target.empty()) throw ShapeError("valid example without a target name");
    out.l2 = name_loss(tape, enc, ex.target);
    out.total = tape.sum({out.l1, tape.scale(out.l2, static_cast<T>(lambda))});
  } else {
    out.total = out.l1;
  }
  return out;
}

template <typename T>
Var Model<T>::mct_logits(ad::Tape<T>& tape, std::span<const TokenId> tokens, std::size_t position,
                         Rng* dropout_rng) const {
  Var emb = tape.param(embeddings_);
  Var h = sequence_.encode(tape, emb, tokens, position, cfg_.dropout, dropout_rng);
  return tape.linear(emb, h, tape.param(mct_bias_));
}

template <typename T>
Var Model<T>::mct_loss(ad::Tape<T>& tape, std::span<const TokenId> tokens, std::size_t position,
                       TokenId target, Rng* dropout_rng) const {
  if (target < 0 || static_cast<std::size_t>(target) >= cfg_.vocab_size) {
    throw ShapeError("masked token outside the vocabulary");
  }
  return tape.nll_softmax(mct_logits(tape, tokens, position, dropout_rng),
                          static_cast<std::size_t>(target));
}

template <typename T>
std::vector<ad::ParamId> Model<T>::transferable() const {
  std::vector<ad::ParamId> ids{embeddings_};
  auto seq = sequence_.param_ids();
  ids.insert(ids.end(), seq.begin(), seq.end());
  return ids;
}

template <typename T>
void transfer_weights(const Model<T>& pretrained, const TokenVocabulary& pretrained_vocab,
                      Model<T>& fresh, const TokenVocabulary& fresh_vocab) {
  if (!(pretrained_vocab == fresh_vocab)) {
    throw VocabMismatch("vocabularies differ (" + std::to_string(pretrained_vocab.size()) + " vs " +
                        std::to_string(fresh_vocab.size()) + " tokens)");
  }
  const auto src = pretrained.transferable();
  const auto dst = fresh.transferable();
  if (src.size() != dst.size()) throw ShapeError("sentence encoders differ in depth");
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& from = pretrained.params()[src[i]];
    auto& to = fresh.params()[dst[i]];
    if (from.value.shape != to.value.shape || from.name != to.name) {
      throw ShapeError("transfer: " + from.name + " " + from.value.shape.to_string() + " vs " +
                       to.name + " " + to.value.shape.to_string());
    }
    to.value = from.value;
  }
}

template <typename T>
LossBundle joint_loss(std::span<const EncodedExample> batch, const Model<T>& model, double lambda) {
  if (batch.empty()) throw ShapeError("joint loss of an empty batch");
  LossBundle b;
  b.lambda = lambda;
  ad::Tape<T> tape(model.params());
  for (const auto& ex : batch) {
    tape.clear();
    const ExampleLoss<T> loss = model.example_loss(tape, ex, lambda);
    b.l1 += tape.item(loss.l1);
    if (loss.l2.valid()) {
      b.l2 += tape.item(loss.l2);
      ++b.valid;
    } else {
      ++b.invalid;
    }
    b.joint += tape.item(loss.total);
  }
  return b;
}

template class Model<float>;
template class Model<double>;
template LossBundle joint_loss<float>(std::span<const EncodedExample>, const Model<float>&, double);
template LossBundle joint_loss<double>(std::span<const EncodedExample>, const Model<double>&, double);
template void transfer_weights<float>(const Model<float>&, const TokenVocabulary&, Model<float>&,
                                      const TokenVocabulary&);
template void transfer_weights<double>(const Model<double>&, const TokenVocabulary&,
                                       Model<double>&, const TokenVocabulary&);

}  // namespace taxo
