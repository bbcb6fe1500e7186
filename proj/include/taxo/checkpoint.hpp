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

#include <filesystem>
#include <iosfwd>

#include "taxo/model.hpp"
#include "taxo/vocabulary.hpp"

namespace taxo {

// Binary layout, all integers unsigned 32-bit little-endian:
//
//   "GTX1"
//   vocabulary   count, then per token: length, UTF-8 bytes
//   node ids     count, then per id: length, bytes
//   parameters   count, then per record: name length, name, rank,
//                rank dims, product(dims) IEEE-754 float32 values
//   config       count, then per entry: key length, key, value length, value
//
// Parameters are stored in 32-bit precision whatever the model's type.
struct Checkpoint {
  TokenVocabulary vocab;
  NodeIndex nodes;
  Model<float> model;
};

void write_checkpoint(std::ostream& out, const Model<float>& model, const TokenVocabulary& vocab,
                      const NodeIndex& nodes);
void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const TokenVocabulary& vocab, const NodeIndex& nodes);

// Throws IOError if unreadable, FormatError on a malformed or
// inconsistent file.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace taxo
