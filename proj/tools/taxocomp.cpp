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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taxo/checkpoint.hpp"
#include "taxo/corpus.hpp"
#include "taxo/errors.hpp"
#include "taxo/experiment.hpp"
#include "taxo/metrics.hpp"
#include "taxo/mct.hpp"
#include "taxo/pipeline.hpp"
#include "taxo/report.hpp"

namespace fs = std::filesystem;
using namespace taxo;

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 1;

struct Options {
  std::string concepts, edges, corpus, checkpoint, config, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, r_neg, lambda;
  std::optional<std::size_t> k_hops, epochs, max_iter;
  std::optional<std::string> fusion;
  // Subcommand specific.
  std::string split_dir, report, test_ids, new_concepts;
  std::size_t min_freq = 2;
  std::vector<std::string> fusion_grid, relation_grid;
  std::vector<std::size_t> k_hops_grid;
  std::vector<double> r_neg_grid;
  bool serial = false;
};

void add_taxonomy(CLI::App* app, Options& o) {
  app->add_option("--taxonomy-concepts", o.concepts, "Concepts TSV: id<TAB>name")->required();
  app->add_option("--taxonomy-edges", o.edges, "Edges TSV: parent<TAB>child")->required();
}

void add_out_dir(CLI::App* app, Options& o) {
  app->add_option("--out-dir", o.out_dir, "Directory for the outputs")->required();
}

void add_run_flags(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "Run configuration (key=value lines)");
  app->add_option("--seed", o.seed, "Random seed");
  app->add_option("--tau", o.tau, "Quality threshold on p_valid");
  app->add_option("--r-neg", o.r_neg, "Negatives per valid position");
  app->add_option("--lambda", o.lambda, "Weight of the generation loss");
  app->add_option("--k-hops", o.k_hops, "Subgraph and enumeration radius");
  app->add_option("--fusion", o.fusion, "Fusion strategy: mean, max, attention, concat");
  app->add_option("--epochs", o.epochs, "Training epochs");
  app->add_flag("--serial", o.serial, "Disable OpenMP work sharing");
}

std::string checkpoint_config_path(const std::string& checkpoint) { return checkpoint + ".cfg"; }

// Configuration file (or `fallback`), then command-line overrides.
RunConfig resolve_config(const Options& o, RunConfig fallback = {}) {
  RunConfig cfg = o.config.empty() ? std::move(fallback) : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.tau) cfg.tau = *o.tau;
  if (o.r_neg) cfg.r_neg = *o.r_neg;
  if (o.lambda) cfg.lambda = *o.lambda;
  if (o.k_hops) cfg.k_hops = *o.k_hops;
  if (o.fusion) cfg.model.fusion = parse_fusion(*o.fusion);
  if (o.epochs) cfg.optimizer.epochs = *o.epochs;
  if (o.max_iter) cfg.max_iter = *o.max_iter;
  if (o.serial) cfg.parallel = false;
  cfg.validate();
  return cfg;
}

struct LoadedModel {
  ModelState state;
  RunConfig cfg;
};

LoadedModel load_model(const Options& o) {
  Checkpoint ck = load_checkpoint(o.checkpoint);
  RunConfig shipped;
  if (fs::exists(checkpoint_config_path(o.checkpoint))) shipped = load_run_config(checkpoint_config_path(o.checkpoint));
  shipped.model = ck.model.config();
  LoadedModel out{{std::move(ck.vocab), std::move(ck.nodes), std::move(ck.model)}, resolve_config(o, shipped)};
  out.cfg.model = out.state.model.config();
  return out;
}

void save_model(const fs::path& path, const ModelState& state, const RunConfig& cfg) {
  save_checkpoint(path, state.model, state.vocab, state.nodes);
  save_run_config(cfg, checkpoint_config_path(path.string()));
}

std::vector<ConceptId> read_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path.string());
  std::vector<ConceptId> ids;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') ids.push_back(line);
  }
  return ids;
}

void write_ids(const fs::path& path, const std::vector<ConceptId>& ids) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::create_directories(dir);
  return dir;
}

void print_epoch(const EpochStats& s) {
  const double n = static_cast<double>(s.train.valid + s.train.invalid);
  std::cout << "epoch " << s.epoch + 1 << "  lr " << std::setprecision(4) << s.learning_rate << "  loss "
            << s.train.joint / n;
  if (s.validation) {
    std::cout << "  validation " << s.validation->joint / static_cast<double>(s.validation->valid + s.validation->invalid);
  }
  std::cout << '\n';
}

// --- subcommands --------------------------------------------------------------

int run_ingest(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const fs::path dir = prepare_out_dir(o.out_dir);
  std::cout << "concepts " << t.size() << "  edges " << t.edge_count() << "  depth " << t.depth() << '\n';
  if (o.corpus.empty()) {
    const TokenVocabulary vocab = build_vocabulary(t);
    save_vocabulary(vocab, dir / "vocab.txt");
    std::cout << "vocabulary " << vocab.size() << '\n';
    return 0;
  }
  const auto lines = read_corpus(o.corpus);
  const TokenVocabulary vocab = build_corpus_vocabulary(lines, t, o.min_freq);
  const CorpusStore store = index_corpus(lines, t, vocab);
  save_vocabulary(vocab, dir / "vocab.txt");
  save_corpus_store(store, dir / "corpus.tsv");
  std::cout << "vocabulary " << vocab.size() << "  sentences " << store.sentences.size() << "  dropped "
            << store.dropped << '\n';
  return 0;
}

int run_split(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const fs::path dir = prepare_out_dir(o.out_dir);
  const Split s = split_taxonomy(t, o.seed.value_or(0));
  write_ids(dir / "train.ids", s.train);
  write_ids(dir / "validation.ids", s.validation);
  write_ids(dir / "test.ids", s.test);
  save_taxonomy(train_view(t, s), dir / "train_concepts.tsv", dir / "train_edges.tsv");
  std::cout << "train " << s.train.size() << "  validation " << s.validation.size() << "  test " << s.test.size()
            << '\n';
  return 0;
}

int run_pretrain(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = prepare_out_dir(o.out_dir);
  const auto lines = read_corpus(o.corpus);
  ModelState state;
  state.vocab = build_corpus_vocabulary(lines, t, o.min_freq);
  state.nodes = NodeIndex(t.ids());
  const CorpusStore store = index_corpus(lines, t, state.vocab);
  if (store.empty()) throw NoContext("no corpus sentence mentions a taxonomy concept");
  ModelConfig mc = cfg.model;
  mc.vocab_size = state.vocab.size();
  mc.node_count = state.nodes.size();
  mc.dropout = cfg.optimizer.dropout_rate;
  state.model = Model<float>(mc, cfg.seed);
  PretrainConfig pc;
  pc.epochs = o.epochs.value_or(cfg.pretrain_epochs > 0 ? cfg.pretrain_epochs : 5);
  pc.batch_size = cfg.batch_size;
  pc.optimizer = cfg.optimizer;
  pc.seed = cfg.seed;
  pc.parallel = cfg.parallel;
  pretrain(store, state.model, pc, [](std::size_t epoch, double loss) {
    std::cout << "epoch " << epoch + 1 << "  mct loss " << loss << '\n';
  });
  std::cout << "masked-token accuracy " << mct_accuracy(store, state.model).value() << '\n';
  save_model(dir / "pretrained.ckpt", state, cfg);
  return 0;
}

int run_train(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = prepare_out_dir(o.out_dir);

  TrainOptions opts;
  opts.on_epoch = [](const EpochStats& s, const Model<float>&) { print_epoch(s); };
  std::optional<LoadedModel> pretrained;
  if (!o.checkpoint.empty()) {
    pretrained = load_model(o);
    opts.pretrained = &pretrained->state;
  }
  std::optional<TokenVocabulary> corpus_vocab;
  std::optional<CorpusStore> store;
  if (!o.corpus.empty()) {
    const auto lines = read_corpus(o.corpus);
    corpus_vocab = pretrained ? pretrained->state.vocab : build_corpus_vocabulary(lines, t, o.min_freq);
    store = index_corpus(lines, t, *corpus_vocab);
    opts.vocab = &*corpus_vocab;
  }

  Taxonomy t_train = t;
  Taxonomy t_validation;
  if (!o.split_dir.empty()) {
    Split s;
    s.train = read_ids(fs::path(o.split_dir) / "train.ids");
    s.validation = read_ids(fs::path(o.split_dir) / "validation.ids");
    for (const auto& id : s.train) {
      if (!t.contains(id)) throw UnknownConcept("split concept '" + id + "' not in taxonomy");
    }
    t_train = train_view(t, s);
    std::set<ConceptId> keep(s.train.begin(), s.train.end());
    keep.insert(s.validation.begin(), s.validation.end());
    t_validation = restrict_taxonomy(t, keep);
    opts.validation_taxonomy = &t_validation;
    opts.validation_ids = s.validation;
  }

  const TrainResult r = train(t_train, store ? &*store : nullptr, cfg, opts);
  RunConfig shipped = cfg;
  shipped.model = r.state.model.config();
  save_model(dir / "model.ckpt", r.state, shipped);
  std::ofstream hist(dir / "history.tsv");
  hist << "epoch\tlr\tl1\tl2\tjoint\tvalidation\n";
  for (const auto& s : r.history) {
    hist << s.epoch + 1 << '\t' << fmt_double(s.learning_rate) << '\t' << fmt_double(s.train.l1) << '\t'
         << fmt_double(s.train.l2) << '\t' << fmt_double(s.train.joint) << '\t'
         << (s.validation ? fmt_double(s.validation->joint) : "-") << '\n';
  }
  std::cout << "kept epoch " << r.best_epoch + 1 << "  skipped " << r.skipped << "  starved negatives "
            << r.starved_negatives << '\n';
  return 0;
}

void print_report_summary(const CompletionReport& r) {
  std::cout << "positions scored " << r.positions_scored << "  skipped " << r.positions_skipped << "  inserted "
            << r.insertions.size() << "  duplicates " << r.duplicates.size() << '\n';
  for (const auto& ins : r.insertions) {
    std::cout << "  " << std::fixed << std::setprecision(3) << ins.p_valid << "  " << join_tokens(ins.name) << '\n';
  }
  std::cout.unsetf(std::ios::fixed);
}

int run_complete(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const LoadedModel m = load_model(o);
  const fs::path dir = prepare_out_dir(o.out_dir);
  const Completion c = complete(t, m.state, m.cfg);
  save_report(c.report, dir / "report.tsv");
  save_taxonomy(c.taxonomy, dir / "completed_concepts.tsv", dir / "completed_edges.tsv");
  print_report_summary(c.report);
  return 0;
}

int run_gentaxo(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const LoadedModel m = load_model(o);
  const fs::path dir = prepare_out_dir(o.out_dir);
  std::vector<Concept> c0;
  if (!o.new_concepts.empty()) c0 = load_concepts(o.new_concepts);
  ClassifierAttach extraction(m.state, m.cfg, std::max(0.5, m.cfg.tau));
  const Expansion e = gentaxo_plus_plus(t, c0, m.state, extraction, m.cfg);
  save_report(e.report, dir / "report.tsv");
  save_taxonomy(e.taxonomy, dir / "expanded_concepts.tsv", dir / "expanded_edges.tsv");
  for (std::size_t i = 0; i < e.report.iterations.size(); ++i) {
    std::cout << "iteration " << i + 1 << "  new concepts " << e.report.iterations[i].new_concepts
              << "  taxonomy size " << e.report.iterations[i].taxonomy_size << '\n';
  }
  print_report_summary(e.report);
  return 0;
}

int run_evaluate(const Options& o) {
  const Taxonomy gold = load_taxonomy(o.concepts, o.edges);
  const std::vector<ConceptId> test = read_ids(o.test_ids);
  const CompletionReport report = load_report(o.report);
  MetricsReport m = score_completion(report.insertions, gold, std::set<ConceptId>(test.begin(), test.end()));
  if (!o.checkpoint.empty()) {
    const LoadedModel model = load_model(o);
    std::set<ConceptId> known;
    for (const auto& id : gold.ids()) known.insert(id);
    for (const auto& id : test) known.erase(id);
    merge_generation(m, score_generation(held_out_generation_pairs(gold, known, test, model.state, model.cfg)));
  }
  write_metrics(std::cout, m);
  if (!o.out_dir.empty()) {
    std::ofstream out(prepare_out_dir(o.out_dir) / "metrics.tsv");
    write_metrics(out, m);
  }
  return 0;
}

int run_ablate(const Options& o) {
  const Taxonomy t = load_taxonomy(o.concepts, o.edges);
  const RunConfig base = resolve_config(o);
  const fs::path dir = prepare_out_dir(o.out_dir);
  AblationGrid grid;
  for (const auto& f : o.fusion_grid) grid.fusion.push_back(parse_fusion(f));
  grid.k_hops = o.k_hops_grid;
  for (const auto& r : o.relation_grid) grid.relations.push_back(RelationSet::parse(r));
  grid.r_neg = o.r_neg_grid;
  const Split split = split_taxonomy(t, base.seed);

  std::optional<TokenVocabulary> vocab;
  std::optional<CorpusStore> store;
  if (!o.corpus.empty()) {
    const auto lines = read_corpus(o.corpus);
    vocab = build_corpus_vocabulary(lines, t, o.min_freq);
    store = index_corpus(lines, t, *vocab);
  }
  const auto rows = run_ablation(t, split, base, grid, store ? &*store : nullptr, vocab ? &*vocab : nullptr,
                                 [](const AblationRow& row) {
                                   std::cout << "done fusion=" << to_string(row.config.model.fusion)
                                             << " k_hops=" << row.config.k_hops
                                             << " relations=" << row.config.relations.to_string()
                                             << " r_neg=" << fmt_double(row.config.r_neg) << '\n';
                                 });
  write_ablation_table(std::cout, rows);
  std::ofstream out(dir / "ablation.txt");
  write_ablation_table(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taxonomy completion by concept generation"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Build the vocabulary and index a corpus");
  add_taxonomy(ingest, o);
  add_out_dir(ingest, o);
  ingest->add_option("--corpus", o.corpus, "Raw corpus, one sentence per line");
  ingest->add_option("--min-freq", o.min_freq, "Minimum count for corpus-only tokens");

  auto* split = app.add_subcommand("split", "Write a seeded 3:1:1 train/validation/test split");
  add_taxonomy(split, o);
  add_out_dir(split, o);
  split->add_option("--seed", o.seed, "Random seed");

  auto* pre = app.add_subcommand("pretrain", "Masked-token pre-training on a corpus");
  add_taxonomy(pre, o);
  add_out_dir(pre, o);
  add_run_flags(pre, o);
  pre->add_option("--corpus", o.corpus, "Raw corpus, one sentence per line")->required();
  pre->add_option("--min-freq", o.min_freq, "Minimum count for corpus-only tokens");

  auto* tr = app.add_subcommand("train", "Train the position classifier and name generator");
  add_taxonomy(tr, o);
  add_out_dir(tr, o);
  add_run_flags(tr, o);
  tr->add_option("--corpus", o.corpus, "Raw corpus for masked-token pre-training");
  tr->add_option("--checkpoint", o.checkpoint, "Pretrained checkpoint to start from");
  tr->add_option("--split-dir", o.split_dir, "Directory holding train.ids and validation.ids");
  tr->add_option("--min-freq", o.min_freq, "Minimum count for corpus-only tokens");

  auto* comp = app.add_subcommand("complete", "Generate and insert concepts at valid positions");
  add_taxonomy(comp, o);
  add_out_dir(comp, o);
  add_run_flags(comp, o);
  comp->add_option("--checkpoint", o.checkpoint, "Trained checkpoint")->required();

  auto* gpp = app.add_subcommand("gentaxo-pp", "Alternate generation and extraction");
  add_taxonomy(gpp, o);
  add_out_dir(gpp, o);
  add_run_flags(gpp, o);
  gpp->add_option("--checkpoint", o.checkpoint, "Trained checkpoint")->required();
  gpp->add_option("--new-concepts", o.new_concepts, "Concepts TSV of extracted candidates");
  gpp->add_option("--max-iter", o.max_iter, "Maximum number of iterations");

  auto* ev = app.add_subcommand("evaluate", "Score a completion report against gold test concepts");
  add_taxonomy(ev, o);
  ev->add_option("--report", o.report, "Completion report")->required();
  ev->add_option("--test-ids", o.test_ids, "Test concept ids, one per line")->required();
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint for generation accuracy");
  ev->add_option("--out-dir", o.out_dir, "Directory for metrics.tsv");
  ev->add_flag("--serial", o.serial, "Disable OpenMP work sharing");

  auto* ab = app.add_subcommand("ablate", "Sweep fusion, k_hops, relations and r_neg on a held-out split");
  add_taxonomy(ab, o);
  add_out_dir(ab, o);
  add_run_flags(ab, o);
  ab->add_option("--corpus", o.corpus, "Raw corpus for masked-token pre-training");
  ab->add_option("--fusion-grid", o.fusion_grid, "Fusion strategies to compare")->delimiter(',');
  ab->add_option("--k-hops-grid", o.k_hops_grid, "k_hops values to compare")->delimiter(',');
  ab->add_option("--relations-grid", o.relation_grid, "Relation sets, one per flag (e.g. parent,child)");
  ab->add_option("--r-neg-grid", o.r_neg_grid, "r_neg values to compare")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (*ingest) return run_ingest(o);
    if (*split) return run_split(o);
    if (*pre) return run_pretrain(o);
    if (*tr) return run_train(o);
    if (*comp) return run_complete(o);
    if (*gpp) return run_gentaxo(o);
    if (*ev) return run_evaluate(o);
    if (*ab) return run_ablate(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
