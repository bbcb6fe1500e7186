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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "taxo/taxonomy.hpp"

namespace taxo {

using TokenId = std::int32_t;

inline constexpr TokenId kMaskToken = 0;
inline constexpr TokenId kEosToken = 1;
inline constexpr TokenId kUnkToken = 2;
inline constexpr TokenId kPadToken = 3;
inline constexpr TokenId kNumReservedTokens = 4;

inline constexpr std::string_view kReservedTokens[] = {"[MASK]", "[EOS]", "[UNK]", "[PAD]"};

// Bijective token <-> index map with the four reserved entries pinned at
// indices 0..3.
class TokenVocabulary {
 public:
  TokenVocabulary();

  // Appends a token if absent; reserved spellings are refused and map to [UNK].
  TokenId add(std::string_view token);

  TokenId id(std::string_view token) const;  // [UNK] when absent
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const TokenSeq& tokens) const;
  TokenSeq decode(const std::vector<TokenId>& ids) const;

  static bool is_reserved(TokenId id) { return id >= 0 && id < kNumReservedTokens; }

  friend bool operator==(const TokenVocabulary& a, const TokenVocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Tokens of the relation-sentence templates, always present.
const TokenSeq& template_tokens();

// Reserved entries, template tokens, then every taxonomy name token, sorted.
TokenVocabulary build_vocabulary(const Taxonomy& t);

void save_vocabulary(const TokenVocabulary& vocab, const std::filesystem::path& path);
TokenVocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace taxo
