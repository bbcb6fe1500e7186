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

#include "taxo/encoders.hpp"

#include "init.hpp"
#include "taxo/errors.hpp"

namespace taxo {

using ad::Shape;
using ad::Var;

template <typename T>
GruParams<T> GruParams<T>::create(ad::ParameterStore<T>& store, const std::string& prefix,
                                  std::size_t input, std::size_t hidden, Rng& rng) {
  GruParams p;
  p.wi = store.add(prefix + ".wi", detail::uniform_init<T>({3 * hidden, input}, hidden, rng));
  p.wh = store.add(prefix + ".wh", detail::uniform_init<T>({3 * hidden, hidden}, hidden, rng));
  p.bi = store.add(prefix + ".bi", ad::Tensor<T>(ad::vec(3 * hidden)));
  p.bh = store.add(prefix + ".bh", ad::Tensor<T>(ad::vec(3 * hidden)));
  return p;
}

template <typename T>
Var GruParams<T>::step(ad::Tape<T>& tape, Var x, Var h) const {
  return tape.gru_cell(x, h, tape.param(wi), tape.param(wh), tape.param(bi), tape.param(bh));
}

// --- SequenceEncoder --------------------------------------------------------

template <typename T>
SequenceEncoder<T>::SequenceEncoder(ad::ParameterStore<T>& store, const std::string& prefix,
                                    std::size_t hidden, std::size_t layers, Rng& rng)
    : hidden_(hidden) {
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t input = l == 0 ? hidden : 2 * hidden;
    const std::string name = prefix + ".l" + std::to_string(l);
    forward_.push_back(GruParams<T>::create(store, name + ".fwd", input, hidden, rng));
    backward_.push_back(GruParams<T>::create(store, name + ".bwd", input, hidden, rng));
  }
  proj_w_ = store.add(prefix + ".proj.w", detail::uniform_init<T>({hidden, 2 * hidden}, 2 * hidden, rng));
  proj_b_ = store.add(prefix + ".proj.b", ad::Tensor<T>(ad::vec(hidden)));
}

template <typename T>
std::vector<ad::ParamId> SequenceEncoder<T>::param_ids() const {
  std::vector<ad::ParamId> ids;
  for (const auto* dir : {&forward_, &backward_}) {
    for (const auto& p : *dir) ids.insert(ids.end(), {p.wi, p.wh, p.bi, p.bh});
  }
  ids.push_back(proj_w_);
  ids.push_back(proj_b_);
  return ids;
}

template <typename T>
Var SequenceEncoder<T>::encode(ad::Tape<T>& tape, Var embeddings, std::span<const TokenId> tokens,
                               std::size_t position, double dropout, Rng* rng) const {
  const std::size_t n = tokens.size();
  if (n == 0) throw EmptySentence("no tokens to encode");
  if (position >= n) throw ShapeError("encode position " + std::to_string(position) + " of " +
                                      std::to_string(n));
  std::vector<Var> inputs(n);
  for (std::size_t t = 0; t < n; ++t) {
    inputs[t] = tape.row(embeddings, static_cast<std::size_t>(tokens[t]));
    if (rng != nullptr) inputs[t] = tape.dropout(inputs[t], dropout, *rng);
  }
  const std::vector<T> zeros(hidden_, T(0));
  const std::size_t layers = forward_.size();
  Var fwd_at, bwd_at;
  for (std::size_t l = 0; l < layers; ++l) {
    const bool top = l + 1 == layers;
    // The top layer only needs the states that reach `position`.
    const std::size_t fwd_end = top ? position + 1 : n;
    const std::size_t bwd_begin = top ? position : 0;
    std::vector<Var> fwd(n), bwd(n);
    Var h = tape.constant(zeros);
    for (std::size_t t = 0; t < fwd_end; ++t) fwd[t] = h = forward_[l].step(tape, inputs[t], h);
    h = tape.constant(zeros);
    for (std::size_t t = n; t-- > bwd_begin;) bwd[t] = h = backward_[l].step(tape, inputs[t], h);
    if (top) {
      fwd_at = fwd[position];
      bwd_at = bwd[position];
    } else {
      for (std::size_t t = 0; t < n; ++t) inputs[t] = tape.concat({fwd[t], bwd[t]});
    }
  }
  return tape.tanh(tape.linear(tape.param(proj_w_), tape.concat({fwd_at, bwd_at}), tape.param(proj_b_)));
}

// --- GraphEncoder -----------------------------------------------------------

template <typename T>
GraphEncoder<T>::GraphEncoder(ad::ParameterStore<T>& store, const std::string& prefix,
                              std::size_t node_rows, std::size_t dim, std::size_t layers,
                              Aggregate aggregate, bool directed, double init_scale, Rng& rng)
    : dim_(dim), aggregate_(aggregate), directed_(directed) {
  table_ = store.add(prefix + ".nodes", detail::normal_init<T>({node_rows + 2, dim}, init_scale, rng));
  for (std::size_t k = 0; k < layers; ++k) {
    const std::string name = prefix + ".l" + std::to_string(k);
    weights_.push_back(store.add(name + ".w", detail::uniform_init<T>({dim, 2 * dim}, 2 * dim, rng)));
    biases_.push_back(store.add(name + ".b", ad::Tensor<T>(ad::vec(dim))));
    if (aggregate == Aggregate::kAttention) {
      attention_.push_back(store.add(name + ".att", detail::uniform_init<T>(ad::vec(2 * dim), 2 * dim, rng)));
    }
  }
}

template <typename T>
Var GraphEncoder<T>::encode(ad::Tape<T>& tape, const EncodedSubgraph& g, GraphDirection direction,
                            GraphTrace<T>* trace) const {
  const std::size_t n = g.rows.size();
  if (n == 0) throw MissingAnchor("subgraph has no anchor node");
  std::vector<std::vector<std::size_t>> in(n);
  for (const auto& [p, c] : g.edges) {
    if (p >= n || c >= n) throw ShapeError("subgraph edge index out of range");
    const bool down = direction == GraphDirection::kDown;
    if (!directed_ || down) in[c].push_back(p);
    if (!directed_ || !down) in[p].push_back(c);
  }
  Var table = tape.param(table_);
  std::vector<Var> state(n);
  for (std::size_t i = 0; i < n; ++i) state[i] = tape.row(table, g.rows[i]);
  const std::vector<T> zeros(dim_, T(0));
  if (trace != nullptr) trace->attention.assign(weights_.size(), std::vector<std::vector<T>>(n));

  for (std::size_t k = 0; k < weights_.size(); ++k) {
    Var w = tape.param(weights_[k]);
    Var b = tape.param(biases_[k]);
    std::vector<Var> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      Var agg;
      if (in[i].empty()) {
        agg = tape.constant(zeros);
      } else {
        std::vector<Var> msgs;
        msgs.reserve(in[i].size());
        for (std::size_t j : in[i]) msgs.push_back(state[j]);
        if (aggregate_ == Aggregate::kMean) {
          agg = tape.mean(msgs);
        } else {
          Var att = tape.param(attention_[k]);
          std::vector<Var> scores;
          scores.reserve(msgs.size());
          for (Var m : msgs) scores.push_back(tape.tanh(tape.dot(att, tape.concat({state[i], m}))));
          Var weights = tape.softmax(tape.concat(scores));
          if (trace != nullptr) trace->attention[k][i] = tape.copy(weights);
          agg = tape.weighted_sum(weights, msgs);
        }
      }
      next[i] = tape.tanh(tape.linear(w, tape.concat({state[i], agg}), b));
    }
    state = std::move(next);
  }
  return state[0];
}

template struct GruParams<float>;
template struct GruParams<double>;
template class SequenceEncoder<float>;
template class SequenceEncoder<double>;
template class GraphEncoder<float>;
template class GraphEncoder<double>;

}  // namespace taxo
