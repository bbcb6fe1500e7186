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

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxo/autodiff.hpp"
#include "taxo/model_config.hpp"
#include "taxo/rng.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

template <typename T>
struct GruParams {
  ad::ParamId wi = 0, wh = 0, bi = 0, bh = 0;

  static GruParams create(ad::ParameterStore<T>& store, const std::string& prefix,
                          std::size_t input, std::size_t hidden, Rng& rng);
  ad::Var step(ad::Tape<T>& tape, ad::Var x, ad::Var h) const;
};

// Stacked bidirectional GRU over a token sequence. The state at a position
// is forward ⊕ backward of the top layer, projected back to hidden_dim
// through a tanh layer.
template <typename T>
class SequenceEncoder {
 public:
  SequenceEncoder() = default;
  SequenceEncoder(ad::ParameterStore<T>& store, const std::string& prefix, std::size_t hidden,
                  std::size_t layers, Rng& rng);

  // `embeddings` is the |W| x hidden token table. Dropout on the input
  // embeddings is applied only when `rng` is given. Throws EmptySentence.
  ad::Var encode(ad::Tape<T>& tape, ad::Var embeddings, std::span<const TokenId> tokens,
                 std::size_t position, double dropout, Rng* rng) const;

  std::size_t hidden() const { return hidden_; }
  // Every parameter id owned by the encoder (for weight transfer).
  std::vector<ad::ParamId> param_ids() const;

 private:
  std::size_t hidden_ = 0;
  std::vector<GruParams<T>> forward_;
  std::vector<GruParams<T>> backward_;
  ad::ParamId proj_w_ = 0, proj_b_ = 0;
};

// Local node 0 is the anchor. rows[i] is node i's row in the node table.
struct EncodedSubgraph {
  std::vector<std::size_t> rows;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)
};

enum class GraphDirection { kDown, kUp };

// Attention weights per (layer, node) recorded on request, for inspection.
template <typename T>
struct GraphTrace {
  std::vector<std::vector<std::vector<T>>> attention;  // [layer][node] -> weights
};

// K rounds of Aggregate / Combine over one subgraph:
//   a = Aggregate(in-neighbour states), v' = tanh(W_k (v ⊕ a) + b_k).
// Down graphs pass messages parent -> child, up graphs child -> parent;
// undirected mode uses both. Nodes without in-neighbours aggregate zero.
template <typename T>
class GraphEncoder {
 public:
  static constexpr std::size_t kAnchorRow = 0;
  static constexpr std::size_t kUnknownRow = 1;

  GraphEncoder() = default;
  GraphEncoder(ad::ParameterStore<T>& store, const std::string& prefix, std::size_t node_rows,
               std::size_t dim, std::size_t layers, Aggregate aggregate, bool directed,
               double init_scale, Rng& rng);

  // Throws MissingAnchor if the subgraph has no nodes.
  ad::Var encode(ad::Tape<T>& tape, const EncodedSubgraph& g, GraphDirection direction,
                 GraphTrace<T>* trace = nullptr) const;

  std::size_t dim() const { return dim_; }
  std::size_t layers() const { return weights_.size(); }
  ad::ParamId node_table() const { return table_; }
  ad::ParamId layer_weight(std::size_t k) const { return weights_.at(k); }
  ad::ParamId layer_bias(std::size_t k) const { return biases_.at(k); }
  ad::ParamId attention_vector(std::size_t k) const { return attention_.at(k); }

 private:
  std::size_t dim_ = 0;
  Aggregate aggregate_ = Aggregate::kMean;
  bool directed_ = true;
  ad::ParamId table_ = 0;
  std::vector<ad::ParamId> weights_, biases_, attention_;
};

}  // namespace taxo
