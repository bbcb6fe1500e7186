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

#include "taxo/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "taxo/errors.hpp"

namespace taxo {

namespace {

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

// Name -> smallest id carrying it, plus the longest name length.
struct NameTable {
  std::map<TokenSeq, ConceptId> ids;
  std::size_t longest = 0;

  explicit NameTable(const Taxonomy& t) {
    for (const auto& id : t.ids()) {
      const auto& name = t.name(id);
      ids.emplace(name, id);  // ids() is sorted, so the first insert wins
      longest = std::max(longest, name.size());
    }
  }
};

std::vector<ConceptSpan> match(const TokenSeq& s, const NameTable& names) {
  std::vector<ConceptSpan> all;
  TokenSeq window;
  for (std::size_t i = 0; i < s.size(); ++i) {
    window.clear();
    for (std::size_t len = 1; len <= names.longest && i + len <= s.size(); ++len) {
      window.push_back(s[i + len - 1]);
      auto it = names.ids.find(window);
      if (it != names.ids.end()) all.push_back({i, i + len - 1, it->second});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const ConceptSpan& a, const ConceptSpan& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.start < b.start;
  });
  std::vector<ConceptSpan> kept;
  for (const auto& c : all) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const ConceptSpan& k) {
      return c.start <= k.end && k.start <= c.end;
    });
    if (!clash) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [](const ConceptSpan& a, const ConceptSpan& b) { return a.start < b.start; });
  return kept;
}

}  // namespace

TokenSeq tokenize_corpus_line(std::string_view line) {
  TokenSeq out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::size_t end = word.size();
    while (end > 0 && is_trailing_punct(word[end - 1])) --end;
    if (end > 0) out.push_back(word.substr(0, end));
    for (std::size_t i = end; i < word.size(); ++i) out.emplace_back(1, word[i]);
    word.clear();
  };
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return out;
}

std::vector<TokenSeq> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read corpus " + path.string());
  std::vector<TokenSeq> out;
  std::string line;
  while (std::getline(in, line)) {
    TokenSeq toks = tokenize_corpus_line(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  if (in.bad()) throw IOError("error reading corpus " + path.string());
  return out;
}

TokenVocabulary build_corpus_vocabulary(const std::vector<TokenSeq>& sentences, const Taxonomy& t,
                                        std::size_t min_freq) {
  TokenVocabulary vocab = build_vocabulary(t);
  std::map<std::string, std::size_t> freq;
  for (const auto& s : sentences) {
    for (const auto& tok : s) ++freq[tok];
  }
  for (const auto& [tok, n] : freq) {
    if (n >= min_freq) vocab.add(tok);
  }
  return vocab;
}

std::vector<ConceptSpan> find_concept_spans(const TokenSeq& sentence, const Taxonomy& t) {
  return match(sentence, NameTable(t));
}

CorpusStore index_corpus(const std::vector<TokenSeq>& sentences, const Taxonomy& t,
                         const TokenVocabulary& vocab) {
  const NameTable names(t);
  CorpusStore store;
  for (const auto& s : sentences) {
    auto spans = match(s, names);
    if (spans.empty()) {
      ++store.dropped;
      continue;
    }
    store.sentences.push_back({vocab.encode(s), std::move(spans)});
  }
  return store;
}

CorpusStore index_corpus(const std::filesystem::path& corpus_path, const Taxonomy& t,
                         const TokenVocabulary& vocab) {
  return index_corpus(read_corpus(corpus_path), t, vocab);
}

void save_corpus_store(const CorpusStore& store, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << "# dropped\t" << store.dropped << '\n';
  for (const auto& s : store.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << (i ? " " : "") << s.tokens[i];
    out << '\t';
    for (std::size_t i = 0; i < s.spans.size(); ++i) {
      out << (i ? " " : "") << s.spans[i].start << ':' << s.spans[i].end << ':' << s.spans[i].concept_id;
    }
    out << '\n';
  }
  if (!out) throw IOError("error writing " + path.string());
}

CorpusStore load_corpus_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path.string());
  CorpusStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind("# dropped\t", 0) == 0) {
      store.dropped = std::stoul(line.substr(10));
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": missing tab");
    CorpusSentence s;
    std::istringstream toks(line.substr(0, tab));
    for (TokenId id; toks >> id;) s.tokens.push_back(id);
    std::istringstream spans(line.substr(tab + 1));
    for (std::string item; spans >> item;) {
      const auto a = item.find(':');
      const auto b = item.find(':', a + 1);
      if (a == std::string::npos || b == std::string::npos) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad span '" + item + "'");
      }
      ConceptSpan sp{std::stoul(item.substr(0, a)), std::stoul(item.substr(a + 1, b - a - 1)), item.substr(b + 1)};
      if (sp.end < sp.start || sp.end >= s.tokens.size()) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": span out of range");
      }
      s.spans.push_back(std::move(sp));
    }
    store.sentences.push_back(std::move(s));
  }
  return store;
}

}  // namespace taxo
