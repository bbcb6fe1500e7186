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

#include "taxo/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>

#include "batch.hpp"
#include "parallel.hpp"
#include "taxo/errors.hpp"
#include "taxo/mct.hpp"

#ifdef TAXO_HAVE_OPENMP
#include <omp.h>
#endif

namespace taxo {

// --- RunConfig ----------------------------------------------------------------

void RunConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (k_hops < 1) throw ConfigError("k_hops must be >= 1");
  if (!(r_neg >= 0.0)) throw ConfigError("r_neg must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  optimizer.validate();
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv = model.to_key_values();
  kv["lambda"] = fmt_double(lambda);
  kv["r_neg"] = fmt_double(r_neg);
  kv["tau"] = fmt_double(tau);
  kv["max_iter"] = std::to_string(max_iter);
  kv["k_hops"] = std::to_string(k_hops);
  kv["relations"] = relations.to_string();
  kv["seed"] = std::to_string(seed);
  kv["batch_size"] = std::to_string(batch_size);
  kv["pretrain_epochs"] = std::to_string(pretrain_epochs);
  kv["parallel"] = parallel ? "1" : "0";
  kv["optimizer.base_lr"] = fmt_double(optimizer.base_lr);
  kv["optimizer.min_lr"] = fmt_double(optimizer.min_lr);
  kv["optimizer.cycle_epochs"] = fmt_double(optimizer.cycle_epochs);
  kv["optimizer.momentum"] = fmt_double(optimizer.momentum);
  kv["optimizer.dropout"] = fmt_double(optimizer.dropout_rate);
  kv["optimizer.epochs"] = std::to_string(optimizer.epochs);
  kv["optimizer.clip_norm"] = fmt_double(optimizer.clip_norm);
  return kv;
}

RunConfig RunConfig::from_key_values(const KeyValues& kv) {
  RunConfig c;
  c.model = ModelConfig::from_key_values(kv);
  c.lambda = get_double(kv, "lambda", c.lambda);
  c.r_neg = get_double(kv, "r_neg", c.r_neg);
  c.tau = get_double(kv, "tau", c.tau);
  c.max_iter = get_size(kv, "max_iter", c.max_iter);
  c.k_hops = get_size(kv, "k_hops", c.k_hops);
  if (auto it = kv.find("relations"); it != kv.end()) c.relations = RelationSet::parse(it->second);
  c.seed = get_size(kv, "seed", c.seed);
  c.batch_size = get_size(kv, "batch_size", c.batch_size);
  c.pretrain_epochs = get_size(kv, "pretrain_epochs", c.pretrain_epochs);
  c.parallel = get_size(kv, "parallel", c.parallel ? 1 : 0) != 0;
  auto& o = c.optimizer;
  o.base_lr = get_double(kv, "optimizer.base_lr", o.base_lr);
  o.min_lr = get_double(kv, "optimizer.min_lr", o.min_lr);
  o.cycle_epochs = get_double(kv, "optimizer.cycle_epochs", o.cycle_epochs);
  o.momentum = get_double(kv, "optimizer.momentum", o.momentum);
  o.dropout_rate = get_double(kv, "optimizer.dropout", o.dropout_rate);
  o.epochs = get_size(kv, "optimizer.epochs", o.epochs);
  o.clip_norm = get_double(kv, "optimizer.clip_norm", o.clip_norm);
  c.validate();
  return c;
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  write_key_values(out, cfg.to_key_values());
  if (!out) throw IOError("error writing " + path.string());
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path.string());
  return RunConfig::from_key_values(read_key_values(in));
}

// --- helpers --------------------------------------------------------------

namespace {

// Salts for derived random streams.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kPretrainInitStream,
  kPretrainStream,
  kOrderStream,
  kNegativeStream,
  kDropoutStream,
  kValidationStream,
};

std::optional<EncodedExample> try_example(const Taxonomy& t, const CandidatePosition& pos,
                                          const ModelState& state, const RunConfig& cfg,
                                          std::optional<TokenSeq> target) {
  try {
    return encode_example(make_example(t, pos, cfg.relations, cfg.k_hops, state.vocab, std::move(target)),
                          state.nodes, state.vocab);
  } catch (const NoContext&) {
    return std::nullopt;
  }
}

bool has_unknown(const TokenSeq& name) {
  return std::find(name.begin(), name.end(), std::string(kReservedTokens[kUnkToken])) != name.end();
}

ConceptId fresh_id(const Taxonomy& t, const std::string& prefix, std::size_t& counter,
                   const std::set<ConceptId>& taken = {}) {
  while (true) {
    ConceptId id = prefix + std::to_string(counter++);
    if (!t.contains(id) && !taken.contains(id)) return id;
  }
}

std::set<std::string> name_set(const Taxonomy& t) {
  std::set<std::string> out;
  for (const auto& c : t.concepts()) out.insert(normalize_name(c.name));
  return out;
}

}  // namespace

// --- training -------------------------------------------------------------

std::optional<EncodedExample> masked_example(const Taxonomy& t, const ConceptId& v,
                                             const ModelState& state, const RunConfig& cfg) {
  if (t.is_root(v)) return std::nullopt;
  return try_example(t, mask_position(t, v), state, cfg, t.name(v));
}

TrainResult train(const Taxonomy& t_train, const CorpusStore* corpus, const RunConfig& cfg,
                  const TrainOptions& opts) {
  cfg.validate();
  if (corpus != nullptr && opts.vocab == nullptr && opts.pretrained == nullptr) {
    throw ConfigError("training with a corpus needs the corpus vocabulary");
  }
  TrainResult result;
  ModelState& state = result.state;
  if (opts.vocab != nullptr) {
    state.vocab = *opts.vocab;
  } else if (opts.pretrained != nullptr) {
    state.vocab = opts.pretrained->vocab;
  } else {
    state.vocab = build_vocabulary(t_train);
  }
  state.nodes = NodeIndex(opts.node_ids.empty() ? t_train.ids() : opts.node_ids);
  ModelConfig mc = cfg.model;
  mc.vocab_size = state.vocab.size();
  mc.node_count = state.nodes.size();
  mc.dropout = cfg.optimizer.dropout_rate;
  state.model = Model<float>(mc, Rng::derive(cfg.seed, kInitStream).next());

  if (opts.pretrained != nullptr) {
    transfer_weights(opts.pretrained->model, opts.pretrained->vocab, state.model, state.vocab);
  } else if (corpus != nullptr && cfg.pretrain_epochs > 0 && !corpus->empty()) {
    Model<float> pre(mc, Rng::derive(cfg.seed, kPretrainInitStream).next());
    PretrainConfig pc;
    pc.epochs = cfg.pretrain_epochs;
    pc.batch_size = cfg.batch_size;
    pc.optimizer = cfg.optimizer;
    pc.seed = Rng::derive(cfg.seed, kPretrainStream).next();
    pc.parallel = cfg.parallel;
    result.pretraining = pretrain(*corpus, pre, pc);
    transfer_weights(pre, state.vocab, state.model, state.vocab);
  }

  // Valid positions are fixed across epochs; negatives are redrawn.
  std::vector<CandidatePosition> positions;
  std::vector<EncodedExample> positives;
  for (const auto& v : t_train.ids()) {
    if (t_train.is_root(v)) continue;
    CandidatePosition pos = mask_position(t_train, v);
    auto ex = try_example(t_train, pos, state, cfg, t_train.name(v));
    if (!ex) {
      ++result.skipped;
      continue;
    }
    positions.push_back(std::move(pos));
    positives.push_back(std::move(*ex));
  }
  if (positives.empty()) throw NoContext("no trainable concept in the training taxonomy");

  std::vector<EncodedExample> validation;
  if (opts.validation_taxonomy != nullptr) {
    const Taxonomy& vt = *opts.validation_taxonomy;
    for (std::size_t i = 0; i < opts.validation_ids.size(); ++i) {
      const auto& v = opts.validation_ids[i];
      if (!vt.contains(v)) throw UnknownConcept("validation concept '" + v + "'");
      if (vt.is_root(v)) continue;
      const CandidatePosition pos = mask_position(vt, v);
      auto ex = try_example(vt, pos, state, cfg, vt.name(v));
      if (!ex) continue;
      validation.push_back(std::move(*ex));
      Rng rng = Rng::derive(cfg.seed, kValidationStream, i);
      for (const auto& neg : sample_negatives(vt, pos, cfg.r_neg, rng).positions) {
        if (auto nex = try_example(vt, neg, state, cfg, std::nullopt)) validation.push_back(std::move(*nex));
      }
    }
  }

  Model<float>& model = state.model;
  detail::ShardedGradients<float> shards(model.params());
  std::optional<Model<float>> best;
  double best_loss = std::numeric_limits<double>::infinity();
  const bool use_dropout = cfg.optimizer.dropout_rate > 0.0;

  for (std::size_t epoch = 0; epoch < cfg.optimizer.epochs; ++epoch) {
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng = Rng::derive(cfg.seed, kOrderStream, epoch);
    order_rng.shuffle(std::span<std::size_t>(order));

    // Each positive is followed by its negatives.
    std::vector<const EncodedExample*> items;
    std::vector<EncodedExample> negatives;
    negatives.reserve(static_cast<std::size_t>(static_cast<double>(positives.size()) * (cfg.r_neg + 1.0)) + 1);
    std::vector<std::pair<std::size_t, bool>> layout;  // (index, is_negative)
    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = learning_rate(cfg.optimizer, static_cast<double>(epoch));
    for (std::size_t idx : order) {
      layout.emplace_back(idx, false);
      Rng rng = Rng::derive(cfg.seed, kNegativeStream, epoch, idx);
      auto drawn = sample_negatives(t_train, positions[idx], cfg.r_neg, rng);
      if (drawn.starved) ++result.starved_negatives;
      for (const auto& neg : drawn.positions) {
        if (auto nex = try_example(t_train, neg, state, cfg, std::nullopt)) {
          negatives.push_back(std::move(*nex));
          layout.emplace_back(negatives.size() - 1, true);
        }
      }
    }
    for (const auto& [i, neg] : layout) items.push_back(neg ? &negatives[i] : &positives[i]);
    stats.negatives = negatives.size();

    const std::size_t n = items.size();
    const std::size_t steps = (n + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<double> l1(n, 0.0), l2(n, 0.0);
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * cfg.batch_size;
      const std::size_t count = std::min(cfg.batch_size, n - begin);
      auto totals = shards.run(
          model.params(), count,
          [&](ad::Tape<float>& tape, std::size_t i) {
            const std::size_t k = begin + i;
            Rng rng = Rng::derive(cfg.seed, kDropoutStream, epoch, k);
            auto loss = model.example_loss(tape, *items[k], cfg.lambda, use_dropout ? &rng : nullptr);
            l1[k] = tape.item(loss.l1);
            if (loss.l2.valid()) l2[k] = tape.item(loss.l2);
            return loss.total;
          },
          cfg.parallel);
      for (std::size_t i = 0; i < count; ++i) {
        stats.train.joint += totals[i];
        stats.train.l1 += l1[begin + i];
        stats.train.l2 += l2[begin + i];
        (items[begin + i]->label == 1 ? stats.train.valid : stats.train.invalid)++;
      }
      detail::scale_grads(model.params(), 1.0f / static_cast<float>(count));
      if (cfg.optimizer.clip_norm > 0) clip_grad_norm(model.params(), cfg.optimizer.clip_norm);
      sgd_step(model.params(), cfg.optimizer,
               static_cast<double>(epoch) + static_cast<double>(step) / static_cast<double>(steps));
    }
    stats.train.lambda = cfg.lambda;

    if (!validation.empty()) {
      stats.validation = joint_loss<float>(validation, model, cfg.lambda);
      if (stats.validation->joint < best_loss) {
        best_loss = stats.validation->joint;
        best = model;
        result.best_epoch = epoch;
      }
    } else {
      result.best_epoch = epoch;
    }
    result.history.push_back(stats);
    if (opts.on_epoch) opts.on_epoch(stats, model);
    if (opts.stop && opts.stop(result.history.back(), model)) break;
  }
  if (best) state.model = std::move(*best);
  return result;
}

// --- inference ------------------------------------------------------------

std::vector<ScoredPosition> score_positions(const Taxonomy& t, const ModelState& state,
                                            const RunConfig& cfg, double tau, std::size_t* skipped) {
  const auto positions = enumerate_candidate_positions(t, cfg.k_hops);
  std::vector<std::optional<ScoredPosition>> slots(positions.size());
  detail::for_each_index(state, positions.size(), cfg.parallel, [&](std::size_t i, ad::Tape<float>& tape) {
    auto ex = try_example(t, positions[i], state, cfg, std::nullopt);
    if (!ex) return;
    const Encoding<float> enc = state.model.encode(tape, *ex);
    ScoredPosition s;
    s.position = positions[i];
    s.p_valid = tape.item(state.model.classify(tape, enc));
    if (s.p_valid >= tau) s.name = state.vocab.decode(state.model.generate(tape, enc).tokens);
    slots[i] = std::move(s);
  });
  std::vector<ScoredPosition> out;
  std::size_t missing = 0;
  for (auto& s : slots) {
    if (s) {
      out.push_back(std::move(*s));
    } else {
      ++missing;
    }
  }
  if (skipped != nullptr) *skipped = missing;
  return out;
}

Completion complete(const Taxonomy& t, const ModelState& state, const RunConfig& cfg) {
  cfg.validate();
  Completion out;
  std::size_t skipped = 0;
  auto scored = score_positions(t, state, cfg, cfg.tau, &skipped);
  out.report.positions_scored = scored.size();
  out.report.positions_skipped = skipped;

  std::vector<std::size_t> ranked;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].p_valid >= cfg.tau && scored[i].name) ranked.push_back(i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].p_valid > scored[b].p_valid; });

  const std::set<std::string> existing = name_set(t);
  std::map<std::string, ConceptId> inserted;
  Taxonomy current = t;
  std::size_t counter = 1;
  for (std::size_t i : ranked) {
    const auto& s = scored[i];
    const TokenSeq& name = *s.name;
    if (name.empty() || has_unknown(name)) continue;
    const std::string key = normalize_name(name);
    if (existing.contains(key)) continue;
    Insertion ins{"", name, s.position, s.p_valid};
    if (auto it = inserted.find(key); it != inserted.end()) {
      ins.id = it->second;
      out.report.duplicates.push_back(std::move(ins));
      continue;
    }
    ins.id = fresh_id(current, "gen-", counter);
    try {
      current = insert_concept(current, Concept{ins.id, name}, s.position);
    } catch (const InvalidPosition&) {
      continue;
    }
    inserted.emplace(key, ins.id);
    out.report.insertions.push_back(std::move(ins));
  }
  out.report.iterations.push_back({out.report.insertions.size(), current.size()});
  out.taxonomy = std::move(current);
  return out;
}

TokenSeq generate_for(const Taxonomy& t, const ConceptId& v, const ModelState& state,
                      const RunConfig& cfg) {
  auto ex = masked_example(t, v, state, cfg);
  if (!ex) return {};
  ad::Tape<float> tape(state.model.params());
  return state.vocab.decode(state.model.generate(tape, state.model.encode(tape, *ex)).tokens);
}

std::vector<std::pair<TokenSeq, TokenSeq>> generation_pairs(const Taxonomy& t,
                                                            const std::vector<ConceptId>& ids,
                                                            const ModelState& state,
                                                            const RunConfig& cfg) {
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs(ids.size());
  detail::for_each_index(state, ids.size(), cfg.parallel, [&](std::size_t i, ad::Tape<float>& tape) {
    pairs[i].second = t.name(ids[i]);
    auto ex = masked_example(t, ids[i], state, cfg);
    if (!ex) return;
    pairs[i].first = state.vocab.decode(state.model.generate(tape, state.model.encode(tape, *ex)).tokens);
  });
  return pairs;
}

// --- extraction -------------------------------------------------------------

Taxonomy builtin_classifier_attach(const Taxonomy& t, const std::vector<Concept>& concepts,
                                   const ModelState& state, const RunConfig& cfg,
                                   double min_p_valid, std::map<ConceptId, double>* scores) {
  std::vector<Concept> sorted = concepts;
  std::sort(sorted.begin(), sorted.end(), [](const Concept& a, const Concept& b) { return a.id < b.id; });
  Taxonomy current = t;
  for (const auto& c : sorted) {
    if (current.contains(c.id) || c.name.empty()) continue;
    const std::vector<TokenId> target = state.vocab.encode(c.name);
    const auto positions = enumerate_candidate_positions(current, cfg.k_hops);
    struct Fit {
      double p = 0.0;
      double l2 = std::numeric_limits<double>::infinity();
    };
    std::vector<Fit> fits(positions.size());
    detail::for_each_index(state, positions.size(), cfg.parallel, [&](std::size_t i, ad::Tape<float>& tape) {
      auto ex = try_example(current, positions[i], state, cfg, std::nullopt);
      if (!ex) return;
      const Encoding<float> enc = state.model.encode(tape, *ex);
      fits[i].p = tape.item(state.model.classify(tape, enc));
      if (fits[i].p >= min_p_valid) fits[i].l2 = tape.item(state.model.name_loss(tape, enc, target));
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (fits[i].p < min_p_valid) continue;
      if (!best || fits[i].l2 < fits[*best].l2) best = i;
    }
    if (!best) continue;
    current = insert_concept(current, c, positions[*best]);
    if (scores != nullptr) (*scores)[c.id] = fits[*best].p;
  }
  return current;
}

TaxonomyDraft ClassifierAttach::attach(const Taxonomy& t, const std::vector<Concept>& concepts) {
  TaxonomyDraft draft;
  const Taxonomy out = builtin_classifier_attach(t, concepts, state_, cfg_, min_p_valid_, &draft.scores);
  draft.concepts = out.concepts();
  draft.edges = out.edges();
  return draft;
}

std::vector<Concept> expand_new_concepts(const std::vector<Concept>& previous,
                                         const std::vector<Concept>& generated,
                                         const std::set<std::string>& existing_names) {
  std::vector<Concept> out;
  std::set<std::string> seen;
  for (const auto* group : {&previous, &generated}) {
    for (const auto& c : *group) {
      const std::string key = normalize_name(c.name);
      if (existing_names.contains(key) || !seen.insert(key).second) continue;
      out.push_back(c);
    }
  }
  return out;
}

namespace {

Taxonomy check_draft(const Taxonomy& before, const std::vector<Concept>& offered,
                     const TaxonomyDraft& draft, const std::string& method) {
  Taxonomy after;
  try {
    after = Taxonomy(draft.concepts, draft.edges);
  } catch (const CyclicTaxonomy& e) {
    throw ExtractionContractViolation(method + " returned a cyclic taxonomy: " + e.what());
  } catch (const Error& e) {
    throw ExtractionContractViolation(method + " returned an invalid taxonomy: " + e.what());
  }
  for (const auto& id : before.ids()) {
    if (!after.contains(id) || after.name(id) != before.name(id)) {
      throw ExtractionContractViolation(method + " dropped or renamed concept '" + id + "'");
    }
  }
  std::map<ConceptId, const Concept*> allowed;
  for (const auto& c : offered) allowed.emplace(c.id, &c);
  for (const auto& id : after.ids()) {
    if (before.contains(id)) continue;
    auto it = allowed.find(id);
    if (it == allowed.end() || normalize_name(it->second->name) != normalize_name(after.name(id))) {
      throw ExtractionContractViolation(method + " added concept '" + id + "' it was not given");
    }
  }
  return after;
}

}  // namespace

Expansion gentaxo_plus_plus(const Taxonomy& t0, const std::vector<Concept>& c0,
                            const ModelState& state, ExtractionMethod& extraction,
                            const RunConfig& cfg) {
  cfg.validate();
  Expansion out;
  out.taxonomy = t0;
  out.history.push_back(t0);
  std::vector<Concept> pending = c0;
  std::size_t counter = 1;

  for (std::size_t i = 1; i <= cfg.max_iter; ++i) {
    const Taxonomy& current = out.taxonomy;
    // V'_{i-1} \ V_{i-1}: the names generated at positions scoring >= tau.
    const Completion gen = complete(current, state, cfg);
    std::set<ConceptId> taken;
    for (const auto& c : pending) taken.insert(c.id);
    std::vector<Concept> generated;
    for (const auto& ins : gen.report.insertions) {
      const ConceptId id = fresh_id(current, "gen" + std::to_string(i) + "-", counter, taken);
      taken.insert(id);
      generated.push_back({id, ins.name});
    }
    pending = expand_new_concepts(pending, generated, name_set(current));
    if (pending.empty()) {
      out.report.iterations.push_back({0, current.size()});
      break;
    }
    const TaxonomyDraft draft = extraction.attach(current, pending);
    ++out.extraction_calls;
    Taxonomy next = check_draft(current, pending, draft, extraction.name());

    for (const auto& id : next.ids()) {
      if (current.contains(id)) continue;
      Insertion ins;
      ins.id = id;
      ins.name = next.name(id);
      ins.position = mask_position(next, id);
      ins.position.masked.reset();
      if (auto it = draft.scores.find(id); it != draft.scores.end()) {
        ins.p_valid = it->second;
      } else if (auto ex = masked_example(next, id, state, cfg)) {
        ad::Tape<float> tape(state.model.params());
        ins.p_valid = tape.item(state.model.classify(tape, state.model.encode(tape, *ex)));
      }
      out.report.insertions.push_back(std::move(ins));
    }
    out.report.iterations.push_back({pending.size(), next.size()});
    out.taxonomy = std::move(next);
    out.history.push_back(out.taxonomy);
  }
  return out;
}

}  // namespace taxo
