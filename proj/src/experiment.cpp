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

#include "taxo/experiment.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "parallel.hpp"
#include "taxo/errors.hpp"
#include "taxo/rng.hpp"

namespace taxo {

Taxonomy train_view(const Taxonomy& t, const Split& split) {
  return restrict_taxonomy(t, std::set<ConceptId>(split.train.begin(), split.train.end()));
}

std::vector<std::pair<TokenSeq, TokenSeq>> held_out_generation_pairs(const Taxonomy& t,
                                                                     const std::set<ConceptId>& known,
                                                                     const std::vector<ConceptId>& ids,
                                                                     const ModelState& state,
                                                                     const RunConfig& cfg) {
  std::vector<Taxonomy> views;
  views.reserve(ids.size());
  for (const auto& v : ids) {
    std::set<ConceptId> keep = known;
    keep.insert(v);
    views.push_back(restrict_taxonomy(t, keep));
  }
  std::vector<std::pair<TokenSeq, TokenSeq>> pairs(ids.size());
  detail::for_each_index(state, ids.size(), cfg.parallel, [&](std::size_t i, ad::Tape<float>& tape) {
    pairs[i].second = t.name(ids[i]);
    auto ex = masked_example(views[i], ids[i], state, cfg);
    if (!ex) return;
    pairs[i].first = state.vocab.decode(state.model.generate(tape, state.model.encode(tape, *ex)).tokens);
  });
  return pairs;
}

PositionScores held_out_position_scores(const Taxonomy& t, const std::set<ConceptId>& known,
                                        const std::vector<ConceptId>& ids, const ModelState& state,
                                        const RunConfig& cfg, double negatives_per, std::uint64_t seed) {
  struct Item {
    std::size_t view;
    CandidatePosition position;
    bool valid;
  };
  std::vector<Taxonomy> views;
  std::vector<Item> items;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::set<ConceptId> keep = known;
    keep.insert(ids[i]);
    views.push_back(restrict_taxonomy(t, keep));
    const Taxonomy& view = views.back();
    if (view.is_root(ids[i])) continue;
    const CandidatePosition pos = mask_position(view, ids[i]);
    items.push_back({i, pos, true});
    Rng rng = Rng::derive(seed, i);
    for (auto& neg : sample_negatives(view, pos, negatives_per, rng).positions) {
      items.push_back({i, std::move(neg), false});
    }
  }
  std::vector<std::optional<double>> p(items.size());
  detail::for_each_index(state, items.size(), cfg.parallel, [&](std::size_t i, ad::Tape<float>& tape) {
    try {
      const auto ex = encode_example(
          make_example(views[items[i].view], items[i].position, cfg.relations, cfg.k_hops, state.vocab, std::nullopt),
          state.nodes, state.vocab);
      p[i] = tape.item(state.model.classify(tape, state.model.encode(tape, ex)));
    } catch (const NoContext&) {
    }
  });
  PositionScores out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (p[i]) (items[i].valid ? out.positive : out.negative).push_back(*p[i]);
  }
  return out;
}

HeldOutResult run_held_out(const Taxonomy& t, const Split& split, const RunConfig& cfg,
                           const CorpusStore* corpus, TrainOptions opts) {
  HeldOutResult out;
  const Taxonomy t_train = train_view(t, split);
  std::set<ConceptId> known(split.train.begin(), split.train.end());
  std::set<ConceptId> with_validation = known;
  with_validation.insert(split.validation.begin(), split.validation.end());
  const Taxonomy t_validation = restrict_taxonomy(t, with_validation);
  opts.validation_taxonomy = split.validation.empty() ? nullptr : &t_validation;
  opts.validation_ids = split.validation;

  out.trained = train(t_train, corpus, cfg, opts);
  out.completion = complete(t_train, out.trained.state, cfg);
  const std::set<ConceptId> test(split.test.begin(), split.test.end());
  out.metrics = score_completion(out.completion.report.insertions, t, test);
  merge_generation(out.metrics,
                   score_generation(held_out_generation_pairs(t, known, split.test, out.trained.state, cfg)));
  return out;
}

std::vector<AblationRow> run_ablation(const Taxonomy& t, const Split& split, const RunConfig& base,
                                      const AblationGrid& grid, const CorpusStore* corpus,
                                      const TokenVocabulary* vocab,
                                      const std::function<void(const AblationRow&)>& on_row) {
  auto axis = [](const auto& values, const auto& fallback) {
    using V = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<V>{fallback} : std::vector<V>(values.begin(), values.end());
  };
  const auto fusions = axis(grid.fusion, base.model.fusion);
  const auto hops = axis(grid.k_hops, base.k_hops);
  const auto relations = axis(grid.relations, base.relations);
  const auto r_negs = axis(grid.r_neg, base.r_neg);

  std::vector<AblationRow> rows;
  for (auto f : fusions) {
    for (auto k : hops) {
      for (const auto& r : relations) {
        for (double neg : r_negs) {
          AblationRow row;
          row.config = base;
          row.config.model.fusion = f;
          row.config.k_hops = k;
          row.config.relations = r;
          row.config.r_neg = neg;
          TrainOptions opts;
          opts.vocab = vocab;
          row.metrics = run_held_out(t, split, row.config, corpus, opts).metrics;
          if (on_row) on_row(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

namespace {

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * *v;
  return os.str();
}

}  // namespace

void write_ablation_table(std::ostream& out, const std::vector<AblationRow>& rows) {
  const char* headers[] = {"fusion", "k_hops", "relations", "r_neg", "P", "R", "F1", "Acc", "Acc-Uni", "Acc-Multi"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    cells.push_back({to_string(row.config.model.fusion), std::to_string(row.config.k_hops),
                     row.config.relations.to_string(), fmt_double(row.config.r_neg), pct(m.precision),
                     pct(m.recall), pct(m.f1), pct(m.acc), pct(m.acc_uni), pct(m.acc_multi)});
  }
  std::vector<std::size_t> width(std::size(headers));
  for (std::size_t c = 0; c < width.size(); ++c) {
    width[c] = std::string(headers[c]).size();
    for (const auto& r : cells) width[c] = std::max(width[c], r[c].size());
  }
  auto line = [&](auto&& cell) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      if (c > 0) out << "  ";
      // Text columns left-aligned, numbers right-aligned.
      out << (c < 3 ? std::left : std::right) << std::setw(static_cast<int>(width[c])) << cell(c);
    }
    out << '\n';
  };
  line([&](std::size_t c) { return std::string(headers[c]); });
  for (const auto& r : cells) line([&](std::size_t c) { return r[c]; });
}

}  // namespace taxo
