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
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "taxo/autodiff.hpp"
#include "taxo/context.hpp"
#include "taxo/decoder.hpp"
#include "taxo/encoders.hpp"
#include "taxo/fusion.hpp"
#include "taxo/model_config.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

// Concept id -> node-table row. Rows 0 and 1 are the anchor and unknown
// embeddings; known concepts start at row 2 in id order.
class NodeIndex {
 public:
  static constexpr std::size_t kFirstRow = 2;

  NodeIndex() = default;
  explicit NodeIndex(std::vector<ConceptId> ids);

  std::size_t row(const ConceptId& id) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<ConceptId>& ids() const { return ids_; }

  friend bool operator==(const NodeIndex& a, const NodeIndex& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<ConceptId> ids_;
  std::unordered_map<ConceptId, std::size_t> rows_;
};

// A TrainingExample lowered to token ids and node rows.
struct EncodedExample {
  std::vector<std::vector<TokenId>> sentences;
  EncodedSubgraph down;
  EncodedSubgraph up;
  std::vector<TokenId> target;  // empty for invalid positions
  int label = 0;
};

EncodedExample encode_example(const TrainingExample& ex, const NodeIndex& nodes,
                              const TokenVocabulary& vocab);

template <typename T>
struct Encoding {
  ad::Var embeddings;
  ad::Var h_seq;
  ad::Var v_graph;
  ad::Var v_fuse;
  ad::Var sentence_weights;
  ad::Var beta;
};

template <typename T>
struct ExampleLoss {
  ad::Var l1;
  ad::Var l2;  // invalid for negatives
  ad::Var total;
};

// All learnable state: token embeddings, the BiGRU sentence encoder, the
// down / up graph encoders, fusion, both heads, and the masked-token head.
template <typename T>
class Model {
 public:
  Model() = default;
  Model(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ad::ParameterStore<T>& params() { return store_; }
  const ad::ParameterStore<T>& params() const { return store_; }

  // `dropout_rng` enables training-mode dropout.
  Encoding<T> encode(ad::Tape<T>& tape, const EncodedExample& ex, Rng* dropout_rng = nullptr) const;
  ad::Var classify(ad::Tape<T>& tape, const Encoding<T>& enc) const;
  ad::Var name_loss(ad::Tape<T>& tape, const Encoding<T>& enc, std::span<const TokenId> target) const;
  Generation<T> generate(ad::Tape<T>& tape, const Encoding<T>& enc) const;
  Generation<T> generate(ad::Tape<T>& tape, const Encoding<T>& enc, std::size_t max_len) const;

  // l1 + lambda * l2 for valid examples, l1 alone for invalid ones.
  ExampleLoss<T> example_loss(ad::Tape<T>& tape, const EncodedExample& ex, double lambda,
                              Rng* dropout_rng = nullptr) const;

  // -log p(target | tokens) at `position`, read out through the tied
  // embedding matrix. `tokens[position]` should already be [MASK].
  ad::Var mct_loss(ad::Tape<T>& tape, std::span<const TokenId> tokens, std::size_t position,
                   TokenId target, Rng* dropout_rng = nullptr) const;
  ad::Var mct_logits(ad::Tape<T>& tape, std::span<const TokenId> tokens, std::size_t position,
                     Rng* dropout_rng = nullptr) const;

  ad::ParamId embeddings() const { return embeddings_; }
  ad::ParamId mct_bias() const { return mct_bias_; }
  const SequenceEncoder<T>& sequence_encoder() const { return sequence_; }
  const GraphEncoder<T>& down_encoder() const { return down_; }
  const GraphEncoder<T>& up_encoder() const { return up_; }
  const ClassifierHead<T>& classifier() const { return classifier_; }
  const GeneratorHead<T>& generator() const { return generator_; }

  // Token embeddings and the sentence encoder, the part carried over from
  // masked-token pre-training.
  std::vector<ad::ParamId> transferable() const;

 private:
  ModelConfig cfg_;
  ad::ParameterStore<T> store_;
  ad::ParamId embeddings_ = 0;
  ad::ParamId mct_bias_ = 0;
  SequenceEncoder<T> sequence_;
  GraphEncoder<T> down_;
  GraphEncoder<T> up_;
  FusionLayer<T> fusion_;
  ClassifierHead<T> classifier_;
  GeneratorHead<T> generator_;
};

struct LossBundle {
  double l1 = 0.0;
  double l2 = 0.0;
  double joint = 0.0;  // Σ_valid (l1 + λ l2) + Σ_invalid l1
  double lambda = 2.0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
};

// Inference-mode sums over a batch. Throws ShapeError on an empty batch.
template <typename T>
LossBundle joint_loss(std::span<const EncodedExample> batch, const Model<T>& model, double lambda);

// Copies embeddings and the sentence encoder from `pretrained` into
// `fresh`. Throws VocabMismatch when vocabularies differ and ShapeError
// when encoder shapes differ.
template <typename T>
void transfer_weights(const Model<T>& pretrained, const TokenVocabulary& pretrained_vocab,
                      Model<T>& fresh, const TokenVocabulary& fresh_vocab);

}  // namespace taxo
