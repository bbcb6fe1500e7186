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
#include <vector>

#include "taxo/taxonomy.hpp"

namespace taxo {

// Forest whose names compose: a child is named by prefixing one modifier
// word to its parent's name ("membrane proteins" -> "outer membrane
// proteins"). Sibling modifiers are distinct and never repeat a word of the
// parent's name.
struct SyntheticConfig {
  std::size_t concepts = 60;
  std::size_t roots = 3;
  std::size_t min_children = 2;
  std::size_t max_children = 4;
  std::size_t max_depth = 4;  // counted in nodes, so names hold <= max_depth tokens
  std::uint64_t seed = 0;
};

// Throws ConfigError when the shape cannot hold `concepts` nodes.
Taxonomy synthetic_taxonomy(const SyntheticConfig& cfg);

// Templated sentences mentioning every concept `mentions` times, mostly
// alongside its parent or a child; tokenized and lowercased.
std::vector<TokenSeq> synthetic_corpus(const Taxonomy& t, std::size_t mentions, std::uint64_t seed);

}  // namespace taxo
