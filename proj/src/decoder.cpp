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

#include "taxo/decoder.hpp"

#include <cmath>
#include <limits>

#include "init.hpp"
#include "taxo/errors.hpp"

namespace taxo {

using ad::Var;

template <typename T>
ClassifierHead<T>::ClassifierHead(ad::ParameterStore<T>& store, std::size_t input,
                                  std::size_t hidden1, std::size_t hidden2, Rng& rng)
    : input_(input) {
  w1_ = store.add("classifier.w1", detail::uniform_init<T>({hidden1, input}, input, rng));
  b1_ = store.add("classifier.b1", ad::Tensor<T>(ad::vec(hidden1)));
  w2_ = store.add("classifier.w2", detail::uniform_init<T>({hidden2, hidden1}, hidden1, rng));
  b2_ = store.add("classifier.b2", ad::Tensor<T>(ad::vec(hidden2)));
  w3_ = store.add("classifier.w3", detail::uniform_init<T>({1, hidden2}, hidden2, rng));
  b3_ = store.add("classifier.b3", ad::Tensor<T>(ad::vec(1)));
}

template <typename T>
Var ClassifierHead<T>::forward(ad::Tape<T>& tape, Var x) const {
  if (tape.shape(x) != ad::vec(input_)) {
    throw ShapeError("classifier: expected " + ad::vec(input_).to_string() + ", got " +
                     tape.shape(x).to_string());
  }
  Var h = tape.tanh(tape.linear(tape.param(w1_), x, tape.param(b1_)));
  h = tape.tanh(tape.linear(tape.param(w2_), h, tape.param(b2_)));
  return tape.sigmoid(tape.linear(tape.param(w3_), h, tape.param(b3_)));
}

template <typename T>
GeneratorHead<T>::GeneratorHead(ad::ParameterStore<T>& store, std::size_t hidden,
                                std::size_t graph_dim, std::size_t fused_dim,
                                std::size_t readout_dim, std::size_t vocab_size, Rng& rng) {
  gru_ = GruParams<T>::create(store, "generator.gru", hidden, hidden, rng);
  const std::size_t in = hidden + graph_dim;
  in_w_ = store.add("generator.in.w", detail::uniform_init<T>({hidden, in}, in, rng));
  in_b_ = store.add("generator.in.b", ad::Tensor<T>(ad::vec(hidden)));
  const std::size_t rd = 2 * hidden + fused_dim;
  read_w_ = store.add("generator.readout.w", detail::uniform_init<T>({readout_dim, rd}, rd, rng));
  read_b_ = store.add("generator.readout.b", ad::Tensor<T>(ad::vec(readout_dim)));
  out_w_ = store.add("generator.out.w",
                     detail::uniform_init<T>({vocab_size, readout_dim}, readout_dim, rng));
  out_b_ = store.add("generator.out.b", ad::Tensor<T>(ad::vec(vocab_size)));
}

template <typename T>
std::vector<ad::ParamId> GeneratorHead<T>::param_ids() const {
  return {gru_.wi, gru_.wh, gru_.bi, gru_.bh, in_w_, in_b_, read_w_, read_b_, out_w_, out_b_};
}

template <typename T>
typename GeneratorHead<T>::Step GeneratorHead<T>::step(ad::Tape<T>& tape, Var embeddings,
                                                       TokenId prev, Var state, Var v_graph,
                                                       Var v_fuse) const {
  Var emb = tape.row(embeddings, static_cast<std::size_t>(prev));
  Var hidden_in = tape.tanh(tape.linear(tape.param(in_w_), tape.concat({state, v_graph}), tape.param(in_b_)));
  Var next = gru_.step(tape, emb, hidden_in);
  Var r = tape.tanh(tape.linear(tape.param(read_w_), tape.concat({emb, next, v_fuse}), tape.param(read_b_)));
  return {next, tape.linear(tape.param(out_w_), r, tape.param(out_b_))};
}

template <typename T>
Var GeneratorHead<T>::loss(ad::Tape<T>& tape, Var embeddings, std::span<const TokenId> target,
                           Var h_seq, Var v_graph, Var v_fuse) const {
  if (target.empty()) throw ShapeError("generator loss: empty target");
  const std::size_t vocab = tape.shape(embeddings).rows;
  std::vector<Var> terms;
  terms.reserve(target.size() + 1);
  Var state = h_seq;
  TokenId prev = kEosToken;
  for (std::size_t t = 0; t <= target.size(); ++t) {
    Step s = step(tape, embeddings, prev, state, v_graph, v_fuse);
    TokenId want = t < target.size() ? target[t] : kEosToken;
    if (want < 0 || static_cast<std::size_t>(want) >= vocab) want = kUnkToken;
    terms.push_back(tape.nll_softmax(s.logits, static_cast<std::size_t>(want)));
    state = s.state;
    prev = want;
  }
  return tape.sum(terms);
}

template <typename T>
Generation<T> GeneratorHead<T>::generate(ad::Tape<T>& tape, Var embeddings, Var h_seq,
                                         Var v_graph, Var v_fuse, std::size_t max_len) const {
  Generation<T> out;
  Var state = h_seq;
  TokenId prev = kEosToken;
  // Up to max_len name tokens, then stop whether or not [EOS] came.
  for (std::size_t t = 0; t <= max_len; ++t) {
    Step s = step(tape, embeddings, prev, state, v_graph, v_fuse);
    state = s.state;
    const auto logits = tape.value(s.logits);
    std::size_t best = 0;
    T best_v = -std::numeric_limits<T>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const auto id = static_cast<TokenId>(i);
      if (id == kMaskToken || id == kPadToken) continue;
      if (logits[i] > best_v) {
        best_v = logits[i];
        best = i;
      }
    }
    if (t == max_len && static_cast<TokenId>(best) != kEosToken) break;
    T m = -std::numeric_limits<T>::infinity();
    for (T v : logits) m = std::max(m, v);
    T z = 0;
    for (T v : logits) z += std::exp(v - m);
    out.log_probs.push_back(logits[best] - m - std::log(z));
    if (static_cast<TokenId>(best) == kEosToken) {
      out.finished = true;
      break;
    }
    out.tokens.push_back(static_cast<TokenId>(best));
    prev = static_cast<TokenId>(best);
  }
  out.final_state = state;
  return out;
}

template class ClassifierHead<float>;
template class ClassifierHead<double>;
template class GeneratorHead<float>;
template class GeneratorHead<double>;

}  // namespace taxo
