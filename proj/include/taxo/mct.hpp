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
#include <functional>
#include <vector>

#include "taxo/corpus.hpp"
#include "taxo/model.hpp"
#include "taxo/optimizer.hpp"

namespace taxo {

// One sentence with a single concept token replaced by [MASK].
struct MaskedToken {
  std::vector<TokenId> tokens;
  std::size_t position = 0;
  TokenId target = kUnkToken;
  ConceptId concept_id;
};

// Uniform span, then a uniform position inside it.
MaskedToken mask_concept_token(const CorpusSentence& sentence, Rng& rng);
// Uniform sentence, then as above. Throws NoContext on an empty store.
MaskedToken draw_masked_token(const CorpusStore& store, Rng& rng);

// L_MCT for one drawn sentence. With a gradient buffer the loss is also
// back-propagated into it.
template <typename T>
T mct_step(const CorpusStore& store, const Model<T>& model, Rng& rng,
           ad::GradientBuffer<T>* grads = nullptr);

struct PretrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 8;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct PretrainStats {
  std::vector<double> epoch_loss;  // mean L_MCT per epoch
};

// Each epoch masks every stored sentence once, in a seeded order.
template <typename T>
PretrainStats pretrain(const CorpusStore& store, Model<T>& model, const PretrainConfig& cfg,
                       const std::function<void(std::size_t, double)>& on_epoch = {});

struct MctAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

// Masks every concept token of every sentence in turn and counts argmax hits.
template <typename T>
MctAccuracy mct_accuracy(const CorpusStore& store, const Model<T>& model);

}  // namespace taxo
