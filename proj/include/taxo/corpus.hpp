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
#include <filesystem>
#include <string_view>
#include <vector>

#include "taxo/taxonomy.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

// Inclusive token range [start, end] naming a taxonomy concept.
struct ConceptSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  ConceptId concept_id;

  std::size_t length() const { return end - start + 1; }
  friend bool operator==(const ConceptSpan&, const ConceptSpan&) = default;
};

struct CorpusSentence {
  std::vector<TokenId> tokens;
  std::vector<ConceptSpan> spans;  // non-overlapping, sorted by start
};

struct CorpusStore {
  std::vector<CorpusSentence> sentences;
  std::size_t dropped = 0;  // lines without any concept mention

  bool empty() const { return sentences.empty(); }
};

// Lowercases, splits on whitespace and detaches trailing punctuation
// (.,;:!?) from each word.
TokenSeq tokenize_corpus_line(std::string_view line);

// One sentence per line; blank lines skipped. Throws IOError.
std::vector<TokenSeq> read_corpus(const std::filesystem::path& path);

// Reserved and template tokens, every taxonomy name token, then corpus
// tokens seen at least `min_freq` times; each group after the reserved
// block sorted.
TokenVocabulary build_corpus_vocabulary(const std::vector<TokenSeq>& sentences, const Taxonomy& t,
                                        std::size_t min_freq = 2);

// Exact token-sequence matches of concept names. Longer matches win, ties
// go to the leftmost; when several concepts share a name the smallest id is
// used. Sentences without a match are dropped.
std::vector<ConceptSpan> find_concept_spans(const TokenSeq& sentence, const Taxonomy& t);
CorpusStore index_corpus(const std::vector<TokenSeq>& sentences, const Taxonomy& t,
                         const TokenVocabulary& vocab);
CorpusStore index_corpus(const std::filesystem::path& corpus_path, const Taxonomy& t,
                         const TokenVocabulary& vocab);

// Plain-text store: one line per sentence, "ids<TAB>spans" with spans as
// start:end:id separated by spaces.
void save_corpus_store(const CorpusStore& store, const std::filesystem::path& path);
CorpusStore load_corpus_store(const std::filesystem::path& path);

}  // namespace taxo
