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
#include <vector>

#include "taxo/autodiff.hpp"
#include "taxo/encoders.hpp"
#include "taxo/rng.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

// Three-layer feed-forward position classifier:
// sigmoid(W3 tanh(W2 tanh(W1 x + b1) + b2) + b3).
template <typename T>
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(ad::ParameterStore<T>& store, std::size_t input, std::size_t hidden1,
                 std::size_t hidden2, Rng& rng);

  ad::Var forward(ad::Tape<T>& tape, ad::Var x) const;

  std::size_t input_dim() const { return input_; }
  ad::ParamId final_weight() const { return w3_; }
  ad::ParamId final_bias() const { return b3_; }

 private:
  std::size_t input_ = 0;
  ad::ParamId w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0, w3_ = 0, b3_ = 0;
};

// Cross entropy of a validity probability against a 0/1 label.
template <typename T>
ad::Var loss_l1(ad::Tape<T>& tape, ad::Var p_valid, int label) {
  return tape.binary_cross_entropy(p_valid, label);
}

template <typename T>
struct Generation {
  std::vector<TokenId> tokens;  // [EOS] stripped
  std::vector<T> log_probs;     // one per emitted step, including [EOS]
  bool finished = false;        // true when [EOS] was emitted
  ad::Var final_state;
};

// GRU name decoder. The hidden state starts at h_seq; each step
//   hidden_in = tanh(P (state ⊕ v_graph) + p)
//   state     = GRU(embed(prev), hidden_in)
//   logits    = O tanh(R (embed(prev) ⊕ state ⊕ v_fuse) + r) + o
// over the whole vocabulary. [EOS] doubles as the start symbol.
template <typename T>
class GeneratorHead {
 public:
  GeneratorHead() = default;
  GeneratorHead(ad::ParameterStore<T>& store, std::size_t hidden, std::size_t graph_dim,
                std::size_t fused_dim, std::size_t readout_dim, std::size_t vocab_size, Rng& rng);

  struct Step {
    ad::Var state;
    ad::Var logits;
  };
  Step step(ad::Tape<T>& tape, ad::Var embeddings, TokenId prev, ad::Var state, ad::Var v_graph,
            ad::Var v_fuse) const;

  // Teacher-forced -Σ log p over target tokens and the closing [EOS].
  ad::Var loss(ad::Tape<T>& tape, ad::Var embeddings, std::span<const TokenId> target,
               ad::Var h_seq, ad::Var v_graph, ad::Var v_fuse) const;

  // Greedy decoding; [MASK] and [PAD] are never chosen, ties go to the
  // lowest index. Log-probs come from the unrestricted softmax.
  Generation<T> generate(ad::Tape<T>& tape, ad::Var embeddings, ad::Var h_seq, ad::Var v_graph,
                         ad::Var v_fuse, std::size_t max_len) const;

  ad::ParamId output_weight() const { return out_w_; }
  ad::ParamId output_bias() const { return out_b_; }
  std::vector<ad::ParamId> param_ids() const;

 private:
  GruParams<T> gru_;
  ad::ParamId in_w_ = 0, in_b_ = 0, read_w_ = 0, read_b_ = 0, out_w_ = 0, out_b_ = 0;
};

}  // namespace taxo
