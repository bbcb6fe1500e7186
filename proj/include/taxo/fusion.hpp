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

#include <span>

#include "taxo/autodiff.hpp"
#include "taxo/model_config.hpp"
#include "taxo/rng.hpp"

namespace taxo {

template <typename T>
struct SentenceFusion {
  ad::Var h_seq;
  ad::Var weights;  // w(s), one per sentence
};

template <typename T>
struct GraphFusion {
  ad::Var v_graph;
  ad::Var beta;  // scalar weight of the down state
};

// h_seq = Σ_s w(s) h(s) with w = softmax_s(tanh(w_seq · h(s))).
// Throws NoContext on an empty list.
template <typename T>
SentenceFusion<T> fuse_sentences(ad::Tape<T>& tape, ad::Var w_seq, std::span<const ad::Var> states);

// v_graph = β v_down + (1 - β) v_up, β the two-way softmax of
// tanh(w_down · v_down) and tanh(w_up · v_up).
template <typename T>
GraphFusion<T> fuse_graphs(ad::Tape<T>& tape, ad::Var w_down, ad::Var w_up, ad::Var v_down,
                           ad::Var v_up);

// Parameters used by the non-concat strategies: v_graph is projected to
// dim(h_seq) by tanh-free linear `proj_w v + proj_b`; attention mixes the
// pair with a two-way softmax over tanh(att · x).
struct FuseParams {
  ad::Var proj_w;
  ad::Var proj_b;
  ad::Var att;
};

template <typename T>
ad::Var fuse_all(ad::Tape<T>& tape, FusionStrategy strategy, ad::Var h_seq, ad::Var v_graph,
                 const FuseParams& params);

// Owns the fusion parameters inside a model.
template <typename T>
class FusionLayer {
 public:
  FusionLayer() = default;
  FusionLayer(ad::ParameterStore<T>& store, std::size_t hidden, std::size_t graph_dim,
              FusionStrategy strategy, Rng& rng);

  SentenceFusion<T> sentences(ad::Tape<T>& tape, std::span<const ad::Var> states) const;
  GraphFusion<T> graphs(ad::Tape<T>& tape, ad::Var v_down, ad::Var v_up) const;
  ad::Var combine(ad::Tape<T>& tape, ad::Var h_seq, ad::Var v_graph) const;

 private:
  FusionStrategy strategy_ = FusionStrategy::kConcat;
  ad::ParamId w_seq_ = 0, w_down_ = 0, w_up_ = 0;
  ad::ParamId proj_w_ = 0, proj_b_ = 0, att_ = 0;
  bool has_projection_ = false;
};

}  // namespace taxo
