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

#include "taxo/fusion.hpp"

#include <vector>

#include "init.hpp"
#include "taxo/errors.hpp"

namespace taxo {

using ad::Var;

template <typename T>
SentenceFusion<T> fuse_sentences(ad::Tape<T>& tape, Var w_seq, std::span<const Var> states) {
  if (states.empty()) throw NoContext("no sentence states to fuse");
  std::vector<Var> scores;
  scores.reserve(states.size());
  for (Var h : states) scores.push_back(tape.tanh(tape.dot(w_seq, h)));
  Var weights = tape.softmax(tape.concat(scores));
  return {tape.weighted_sum(weights, states), weights};
}

template <typename T>
GraphFusion<T> fuse_graphs(ad::Tape<T>& tape, Var w_down, Var w_up, Var v_down, Var v_up) {
  if (tape.shape(v_down) != tape.shape(v_up)) {
    throw ShapeError("fuse_graphs: " + tape.shape(v_down).to_string() + " vs " +
                     tape.shape(v_up).to_string());
  }
  Var s_down = tape.tanh(tape.dot(w_down, v_down));
  Var s_up = tape.tanh(tape.dot(w_up, v_up));
  Var weights = tape.softmax(tape.concat({s_down, s_up}));
  const Var pair[] = {v_down, v_up};
  return {tape.weighted_sum(weights, pair), tape.slice(weights, 0, 1)};
}

template <typename T>
Var fuse_all(ad::Tape<T>& tape, FusionStrategy strategy, Var h_seq, Var v_graph,
             const FuseParams& params) {
  if (strategy == FusionStrategy::kConcat) return tape.concat({h_seq, v_graph});
  if (!params.proj_w.valid()) throw ConfigError("fusion strategy needs a graph projection");
  Var g = tape.linear(params.proj_w, v_graph, params.proj_b);
  const Var pair[] = {h_seq, g};
  switch (strategy) {
    case FusionStrategy::kMean: return tape.mean(pair);
    case FusionStrategy::kMax: return tape.maximum(pair);
    case FusionStrategy::kAttention: {
      Var scores = tape.concat({tape.tanh(tape.dot(params.att, h_seq)), tape.tanh(tape.dot(params.att, g))});
      return tape.weighted_sum(tape.softmax(scores), pair);
    }
    case FusionStrategy::kConcat: break;
  }
  throw ConfigError("unknown fusion strategy");
}

template <typename T>
FusionLayer<T>::FusionLayer(ad::ParameterStore<T>& store, std::size_t hidden, std::size_t graph_dim,
                            FusionStrategy strategy, Rng& rng)
    : strategy_(strategy) {
  w_seq_ = store.add("fusion.w_seq", detail::uniform_init<T>(ad::vec(hidden), hidden, rng));
  w_down_ = store.add("fusion.w_down", detail::uniform_init<T>(ad::vec(graph_dim), graph_dim, rng));
  w_up_ = store.add("fusion.w_up", detail::uniform_init<T>(ad::vec(graph_dim), graph_dim, rng));
  has_projection_ = strategy != FusionStrategy::kConcat;
  if (has_projection_) {
    proj_w_ = store.add("fusion.proj.w", detail::uniform_init<T>({hidden, graph_dim}, graph_dim, rng));
    proj_b_ = store.add("fusion.proj.b", ad::Tensor<T>(ad::vec(hidden)));
    att_ = store.add("fusion.att", detail::uniform_init<T>(ad::vec(hidden), hidden, rng));
  }
}

template <typename T>
SentenceFusion<T> FusionLayer<T>::sentences(ad::Tape<T>& tape, std::span<const Var> states) const {
  return fuse_sentences(tape, tape.param(w_seq_), states);
}

template <typename T>
GraphFusion<T> FusionLayer<T>::graphs(ad::Tape<T>& tape, Var v_down, Var v_up) const {
  return fuse_graphs(tape, tape.param(w_down_), tape.param(w_up_), v_down, v_up);
}

template <typename T>
Var FusionLayer<T>::combine(ad::Tape<T>& tape, Var h_seq, Var v_graph) const {
  FuseParams params;
  if (has_projection_) {
    params.proj_w = tape.param(proj_w_);
    params.proj_b = tape.param(proj_b_);
    params.att = tape.param(att_);
  }
  return fuse_all(tape, strategy_, h_seq, v_graph, params);
}

#define TAXO_INSTANTIATE(T)                                                                     \
  template SentenceFusion<T> fuse_sentences<T>(ad::Tape<T>&, Var, std::span<const Var>);       \
  template GraphFusion<T> fuse_graphs<T>(ad::Tape<T>&, Var, Var, Var, Var);                     \
  template Var fuse_all<T>(ad::Tape<T>&, FusionStrategy, Var, Var, const FuseParams&);          \
  template class FusionLayer<T>;

TAXO_INSTANTIATE(float)
TAXO_INSTANTIATE(double)

#undef TAXO_INSTANTIATE

}  // namespace taxo
