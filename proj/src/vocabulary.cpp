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

#include "taxo/vocabulary.hpp"

#include <fstream>
#include <set>

#include "taxo/errors.hpp"

namespace taxo {

TokenVocabulary::TokenVocabulary() {
  for (auto tok : kReservedTokens) {
    index_.emplace(std::string(tok), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(tok);
  }
}

TokenId TokenVocabulary::add(std::string_view token) {
  std::string key(token);
  if (auto it = index_.find(key); it != index_.end()) {
    return is_reserved(it->second) ? kUnkToken : it->second;
  }
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(key, id);
  tokens_.push_back(std::move(key));
  return id;
}

TokenId TokenVocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkToken : it->second;
}

std::vector<TokenId> TokenVocabulary::encode(const TokenSeq& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const TokenId i = id(tok);
    out.push_back(is_reserved(i) ? kUnkToken : i);
  }
  return out;
}

TokenSeq TokenVocabulary::decode(const std::vector<TokenId>& ids) const {
  TokenSeq out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(token(i));
  return out;
}

const TokenSeq& template_tokens() {
  static const TokenSeq kTokens{"is", "a", "class", "of", "subclass", "sibling"};
  return kTokens;
}

TokenVocabulary build_vocabulary(const Taxonomy& t) {
  TokenVocabulary vocab;
  for (const auto& tok : template_tokens()) vocab.add(tok);
  std::set<std::string> names;
  for (const auto& c : t.concepts()) names.insert(c.name.begin(), c.name.end());
  for (const auto& tok : names) vocab.add(tok);
  return vocab;
}

void save_vocabulary(const TokenVocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  for (const auto& tok : vocab.tokens()) out << tok << '\n';
}

TokenVocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "'");
  TokenVocabulary vocab;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (index < static_cast<std::size_t>(kNumReservedTokens)) {
      if (line != kReservedTokens[index]) {
        throw FormatError("vocabulary must start with the reserved tokens");
      }
    } else if (vocab.add(line) != static_cast<TokenId>(index)) {
      throw FormatError("duplicate vocabulary entry '" + line + "'");
    }
    ++index;
  }
  return vocab;
}

}  // namespace taxo
