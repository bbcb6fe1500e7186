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

#include "taxo/mct.hpp"

#include <numeric>

#include "batch.hpp"
#include "taxo/errors.hpp"

namespace taxo {

MaskedToken mask_concept_token(const CorpusSentence& sentence, Rng& rng) {
  if (sentence.spans.empty()) throw NoContext("sentence has no concept span");
  const ConceptSpan& span = sentence.spans[rng.below(sentence.spans.size())];
  MaskedToken m;
  m.tokens = sentence.tokens;
  m.position = span.start + rng.below(span.length());
  m.target = m.tokens[m.position];
  m.tokens[m.position] = kMaskToken;
  m.concept_id = span.concept_id;
  return m;
}

MaskedToken draw_masked_token(const CorpusStore& store, Rng& rng) {
  if (store.empty()) throw NoContext("empty corpus store");
  return mask_concept_token(store.sentences[rng.below(store.sentences.size())], rng);
}

template <typename T>
T mct_step(const CorpusStore& store, const Model<T>& model, Rng& rng, ad::GradientBuffer<T>* grads) {
  const MaskedToken m = draw_masked_token(store, rng);
  ad::Tape<T> tape(model.params(), grads);
  ad::Var loss = model.mct_loss(tape, m.tokens, m.position, m.target);
  if (grads != nullptr) tape.backward(loss);
  return tape.item(loss);
}

template <typename T>
PretrainStats pretrain(const CorpusStore& store, Model<T>& model, const PretrainConfig& cfg,
                       const std::function<void(std::size_t, double)>& on_epoch) {
  cfg.optimizer.validate();
  if (store.empty()) throw NoContext("empty corpus store");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  const std::size_t n = store.sentences.size();
  const std::size_t steps = (n + cfg.batch_size - 1) / cfg.batch_size;
  detail::ShardedGradients<T> shards(model.params());
  std::vector<std::size_t> order(n);
  PretrainStats stats;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = Rng::derive(cfg.seed, 0x6d6374, epoch);
    shuffle.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * cfg.batch_size;
      const std::size_t count = std::min(cfg.batch_size, n - begin);
      auto losses = shards.run(
          model.params(), count,
          [&](ad::Tape<T>& tape, std::size_t i) {
            const std::size_t idx = order[begin + i];
            Rng rng = Rng::derive(cfg.seed, epoch, idx, 1);
            const MaskedToken m = mask_concept_token(store.sentences[idx], rng);
            return model.mct_loss(tape, m.tokens, m.position, m.target,
                                  cfg.optimizer.dropout_rate > 0 ? &rng : nullptr);
          },
          cfg.parallel);
      for (double l : losses) total += l;
      detail::scale_grads(model.params(), static_cast<T>(1.0 / static_cast<double>(count)));
      if (cfg.optimizer.clip_norm > 0) clip_grad_norm(model.params(), cfg.optimizer.clip_norm);
      sgd_step(model.params(), cfg.optimizer,
               static_cast<double>(epoch) + static_cast<double>(step) / static_cast<double>(steps));
    }
    stats.epoch_loss.push_back(total / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, stats.epoch_loss.back());
  }
  return stats;
}

template <typename T>
MctAccuracy mct_accuracy(const CorpusStore& store, const Model<T>& model) {
  MctAccuracy acc;
  ad::Tape<T> tape(model.params());
  for (const auto& s : store.sentences) {
    for (const auto& span : s.spans) {
      for (std::size_t pos = span.start; pos <= span.end; ++pos) {
        std::vector<TokenId> tokens = s.tokens;
        const TokenId target = tokens[pos];
        tokens[pos] = kMaskToken;
        tape.clear();
        const auto logits = tape.value(model.mct_logits(tape, tokens, pos));
        std::size_t best = 0;
        for (std::size_t i = 1; i < logits.size(); ++i) {
          if (logits[i] > logits[best]) best = i;
        }
        acc.correct += static_cast<TokenId>(best) == target;
        ++acc.total;
      }
    }
  }
  return acc;
}

#define TAXO_INSTANTIATE(T)                                                                      \
  template T mct_step<T>(const CorpusStore&, const Model<T>&, Rng&, ad::GradientBuffer<T>*);     \
  template PretrainStats pretrain<T>(const CorpusStore&, Model<T>&, const PretrainConfig&,       \
                                     const std::function<void(std::size_t, double)>&);           \
  template MctAccuracy mct_accuracy<T>(const CorpusStore&, const Model<T>&);

TAXO_INSTANTIATE(float)
TAXO_INSTANTIATE(double)

#undef TAXO_INSTANTIATE

}  // namespace taxo
